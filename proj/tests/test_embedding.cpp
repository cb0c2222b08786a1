#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "assaygen/bioassay.hpp"
#include "assaygen/embedding.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/kernels.hpp"
#include "doctest.h"

namespace {

namespace emb = assaygen::embedding;

emb::EmbeddingVector vec(std::initializer_list<float> values) {
  emb::EmbeddingVector v;
  v.components = values;
  return v;
}

// Independent oracle: long-double accumulation, no shared kernel code.
double cosine_oracle(const std::vector<float>& a, const std::vector<float>& b) {
  long double dot = 0.0L;
  long double na = 0.0L;
  long double nb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
    na += static_cast<long double>(a[i]) * static_cast<long double>(a[i]);
    nb += static_cast<long double>(b[i]) * static_cast<long double>(b[i]);
  }
  return static_cast<double>(dot / (sqrtl(na) * sqrtl(nb)));
}

emb::EmbeddingVector random_vec(std::mt19937_64& rng, std::size_t dim) {
  emb::EmbeddingVector v;
  v.components.resize(dim);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (auto& c : v.components) c = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("cosine matches hand values") {
  CHECK(emb::cosine(vec({3, 4}), vec({3, 4})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(emb::cosine(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(emb::cosine(vec({1, 0}), vec({1, 1})) - 0.70710678) < 1e-8);
  CHECK_THROWS_AS(emb::cosine(vec({1, 0}), vec({1, 0, 0})),
                  assaygen::DimMismatch);
  CHECK_THROWS_AS(emb::cosine(vec({0, 0}), vec({1, 0})), assaygen::ZeroNorm);
}

TEST_CASE("cosine is symmetric and scale invariant") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_vec(rng, 64);
    auto b = random_vec(rng, 64);
    double ab = emb::cosine(a, b);
    double ba = emb::cosine(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);
    emb::EmbeddingVector scaled = a;
    for (auto& c : scaled.components) c *= 4.0f;
    CHECK(std::abs(emb::cosine(scaled, b) - ab) < 1e-9);
  }
}

TEST_CASE("cosine agrees with an independent oracle within 1e-9") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t dim = 8 + rng() % 200;
    auto a = random_vec(rng, dim);
    auto b = random_vec(rng, dim);
    double got = emb::cosine(a, b);
    double expected = cosine_oracle(a.components, b.components);
    CHECK(std::abs(got - expected) < 1e-9);
  }
}

TEST_CASE("embedding payload uses fixed key order and excludes rows") {
  assaygen::bioassay::BioAssayRecord record;
  record.aid = 42;
  record.title = "t";
  record.description = "d";
  record.protocol = "p";
  record.comment = "c";
  std::string payload = emb::embedding_payload(record);
  CHECK(payload ==
        R"({"aid":42,"title":"t","description":"d","protocol":"p","comment":"c"})");

  assaygen::bioassay::BioAssayRecord with_rows = record;
  for (int i = 0; i < 500; ++i) {
    assaygen::bioassay::ActivityRow row;
    row.smiles = "CCO";
    row.outcome = assaygen::bioassay::Outcome::kActive;
    with_rows.rows.push_back(row);
  }
  CHECK(emb::embedding_payload(with_rows) == payload);

  assaygen::bioassay::BioAssayRecord other = record;
  other.aid = 43;
  CHECK(emb::embedding_payload(other) != payload);

  assaygen::bioassay::BioAssayRecord blank;
  blank.aid = 1;
  CHECK_THROWS_AS(emb::embedding_payload(blank),
                  assaygen::EmptySerialization);
}

TEST_CASE("top_k returns exact brute-force order with aid tie-break") {
  std::mt19937_64 rng(31);
  emb::VectorIndex index;
  std::vector<emb::EmbeddingVector> stored;
  const std::size_t dim = 32;
  for (long long aid = 0; aid < 500; ++aid) {
    auto v = random_vec(rng, dim);
    index.add(aid + 1000, v);
    stored.push_back(v);
  }
  auto query = random_vec(rng, dim);

  struct Hit {
    long long aid;
    double sim;
  };
  std::vector<Hit> oracle;
  for (std::size_t i = 0; i < stored.size(); ++i) {
    oracle.push_back({static_cast<long long>(i) + 1000,
                      cosine_oracle(query.components, stored[i].components)});
  }
  std::sort(oracle.begin(), oracle.end(), [](const Hit& a, const Hit& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.aid < b.aid;
  });

  for (std::size_t k : {1u, 7u, 300u, 499u, 500u, 900u}) {
    auto hits = index.top_k(query, k);
    CHECK(hits.size() == std::min<std::size_t>(k, 500));
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].aid == oracle[i].aid);
      CHECK(std::abs(hits[i].similarity - oracle[i].sim) < 1e-9);
      if (i > 0) CHECK(hits[i - 1].similarity >= hits[i].similarity);
    }
  }
}

TEST_CASE("top_k tie-break puts equal similarities in ascending aid order") {
  emb::VectorIndex index;
  index.add(30, vec({1, 0}));
  index.add(10, vec({2, 0}));
  index.add(20, vec({5, 0}));
  index.add(5, vec({0, 1}));
  auto hits = index.top_k(vec({1, 0}), 4);
  REQUIRE(hits.size() == 4);
  CHECK(hits[0].aid == 10);
  CHECK(hits[1].aid == 20);
  CHECK(hits[2].aid == 30);
  CHECK(hits[3].aid == 5);
  CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("index rejects bad inputs") {
  emb::VectorIndex index;
  CHECK_THROWS_AS(index.top_k(vec({1, 0}), 3), assaygen::EmptyIndex);
  index.add(1, vec({1, 2, 3}));
  CHECK_THROWS_AS(index.add(2, vec({1, 2})), assaygen::DimMismatch);
  CHECK_THROWS_AS(index.add(3, vec({0, 0, 0})), assaygen::ZeroNorm);
  CHECK_THROWS_AS(index.add(1, vec({1, 1, 1})), assaygen::Error);
  CHECK_THROWS_AS(index.top_k(vec({1, 0}), 3), assaygen::DimMismatch);
  CHECK_THROWS_AS(index.top_k(vec({0, 0, 0}), 3), assaygen::ZeroNorm);
  CHECK_THROWS_AS(index.top_k(vec({1, 0, 0}), 0), assaygen::ConfigError);
}

TEST_CASE("index round-trips through the binary file format") {
  namespace fs = std::filesystem;
  std::mt19937_64 rng(47);
  emb::VectorIndex index;
  for (long long aid : {5LL, 17LL, 99991LL}) {
    index.add(aid, random_vec(rng, 24));
  }
  fs::path path = fs::temp_directory_path() / "assaygen_index_test.bin";
  index.save(path.string());

  emb::VectorIndex loaded = emb::VectorIndex::load(path.string());
  CHECK(loaded.size() == 3);
  CHECK(loaded.dim() == 24);
  CHECK(loaded.aids() == index.aids());
  for (long long aid : index.aids()) {
    CHECK(loaded.vector_for(aid).components ==
          index.vector_for(aid).components);
  }

  auto query = random_vec(rng, 24);
  auto before = index.top_k(query, 3);
  auto after = loaded.top_k(query, 3);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].aid == after[i].aid);
    CHECK(before[i].similarity == after[i].similarity);
  }

  // corrupt magic
  std::string blob;
  {
    FILE* f = fopen(path.string().c_str(), "rb");
    REQUIRE(f != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), f)) > 0) blob.append(buf, n);
    fclose(f);
  }
  blob[0] = 'X';
  fs::path bad = fs::temp_directory_path() / "assaygen_index_bad.bin";
  {
    FILE* f = fopen(bad.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    fwrite(blob.data(), 1, blob.size(), f);
    fclose(f);
  }
  CHECK_THROWS_AS(emb::VectorIndex::load(bad.string()),
                  assaygen::IndexFormatError);
  fs::remove(path);
  fs::remove(fs::path(path.string() + ".aids"));
  fs::remove(bad);
}
