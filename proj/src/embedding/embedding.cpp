#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_set>
#include <vector>

#include "assaygen/embedding.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/kernels.hpp"
#include "assaygen/util.hpp"
#include "json.hpp"

namespace assaygen::embedding {

namespace {

constexpr char kMagic[8] = {'B', 'A', 'E', 'I', 'D', 'X', '0', '1'};

void check_finite(const EmbeddingVector& v) {
  for (float c : v.components) {
    if (!std::isfinite(c)) {
      throw Error("NonFinite", "embedding component is not finite");
    }
  }
}

double norm_of(const float* data, std::size_t n) {
  return std::sqrt(kernels::norm_sqr_f32(data, n));
}

}  // namespace

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimMismatch(std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
  double na = norm_of(a.components.data(), a.dim());
  double nb = norm_of(b.components.data(), b.dim());
  if (na == 0.0 || nb == 0.0) throw ZeroNorm("cosine of a zero vector");
  return kernels::dot_f32(a.components.data(), b.components.data(), a.dim()) /
         (na * nb);
}

std::string embedding_payload(const bioassay::BioAssayRecord& record) {
  if (record.title.empty() && record.description.empty() &&
      record.protocol.empty() && record.comment.empty()) {
    throw EmptySerialization("record has no text fields");
  }
  nlohmann::ordered_json payload;
  payload["aid"] = record.aid;
  payload["title"] = record.title;
  payload["description"] = record.description;
  payload["protocol"] = record.protocol;
  payload["comment"] = record.comment;
  return payload.dump();
}

EmbeddingVector embed_record(const bioassay::BioAssayRecord& record,
                             const EmbedFn& embed) {
  return embed(embedding_payload(record));
}

void VectorIndex::add(long long aid, const EmbeddingVector& vector) {
  if (vector.dim() == 0) throw DimMismatch("empty vector");
  if (dim_ == 0) {
    dim_ = vector.dim();
  } else if (vector.dim() != dim_) {
    throw DimMismatch("vector dim " + std::to_string(vector.dim()) +
                      " differs from index dim " + std::to_string(dim_));
  }
  check_finite(vector);
  double norm = norm_of(vector.components.data(), vector.dim());
  if (norm == 0.0) throw ZeroNorm("indexed vectors need positive norm");
  for (long long existing : aids_) {
    if (existing == aid) {
      throw Error("DuplicateAid", "aid " + std::to_string(aid));
    }
  }
  aids_.push_back(aid);
  data_.insert(data_.end(), vector.components.begin(),
               vector.components.end());
  norms_.push_back(norm);
}

std::vector<RetrievalHit> VectorIndex::top_k(const EmbeddingVector& query,
                                             std::size_t k) const {
  if (aids_.empty()) throw EmptyIndex("no vectors indexed");
  if (k == 0) throw ConfigError("k", "must be positive");
  if (query.dim() != dim_) {
    throw DimMismatch("query dim " + std::to_string(query.dim()) +
                      " differs from index dim " + std::to_string(dim_));
  }
  double query_norm = norm_of(query.components.data(), query.dim());
  if (query_norm == 0.0) throw ZeroNorm("query has zero norm");

  std::vector<RetrievalHit> hits(aids_.size());
  for (std::size_t i = 0; i < aids_.size(); ++i) {
    double dot = kernels::dot_f32(query.components.data(),
                                  data_.data() + i * dim_, dim_);
    hits[i] = {aids_[i], dot / (query_norm * norms_[i])};
  }
  std::size_t take = std::min(k, hits.size());
  auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.aid < b.aid;
  };
  std::partial_sort(hits.begin(),
                    hits.begin() + static_cast<std::ptrdiff_t>(take),
                    hits.end(), better);
  hits.resize(take);
  return hits;
}

EmbeddingVector VectorIndex::vector_for(long long aid) const {
  for (std::size_t i = 0; i < aids_.size(); ++i) {
    if (aids_[i] == aid) {
      EmbeddingVector out;
      out.components.assign(data_.begin() +
                                static_cast<std::ptrdiff_t>(i * dim_),
                            data_.begin() +
                                static_cast<std::ptrdiff_t>((i + 1) * dim_));
      return out;
    }
  }
  throw NotFound("aid " + std::to_string(aid) + " not in index");
}

void VectorIndex::save(const std::string& path) const {
  std::string blob;
  blob.reserve(20 + data_.size() * 4);
  blob.append(kMagic, sizeof(kMagic));
  std::uint32_t dim32 = static_cast<std::uint32_t>(dim_);
  std::uint64_t count = aids_.size();
  char scratch[8];
  std::memcpy(scratch, &dim32, 4);
  blob.append(scratch, 4);
  std::memcpy(scratch, &count, 8);
  blob.append(scratch, 8);
  for (float value : data_) {
    std::memcpy(scratch, &value, 4);
    blob.append(scratch, 4);
  }
  write_file(path, blob);

  std::string sidecar;
  for (long long aid : aids_) {
    sidecar += std::to_string(aid);
    sidecar += '\n';
  }
  write_file(path + ".aids", sidecar);
}

VectorIndex VectorIndex::load(const std::string& path) {
  std::string blob = read_file(path);
  if (blob.size() < 20 || std::memcmp(blob.data(), kMagic, 8) != 0) {
    throw IndexFormatError("bad magic in " + path);
  }
  std::uint32_t dim32 = 0;
  std::uint64_t count = 0;
  std::memcpy(&dim32, blob.data() + 8, 4);
  std::memcpy(&count, blob.data() + 12, 8);
  if (dim32 == 0) throw IndexFormatError("zero dimension");
  std::size_t expected = 20 + static_cast<std::size_t>(count) * dim32 * 4;
  if (blob.size() != expected) {
    throw IndexFormatError("file size " + std::to_string(blob.size()) +
                           ", expected " + std::to_string(expected));
  }

  std::string sidecar = read_file(path + ".aids");
  std::vector<long long> aids;
  std::string line;
  auto push_line = [&aids, &path](const std::string& raw) {
    std::string text = trim(raw);
    if (text.empty()) return;
    try {
      aids.push_back(std::stoll(text));
    } catch (const std::exception&) {
      throw IndexFormatError("bad aid line '" + text + "' in " + path +
                             ".aids");
    }
  };
  for (char c : sidecar) {
    if (c == '\n') {
      push_line(line);
      line.clear();
    } else {
      line += c;
    }
  }
  push_line(line);
  if (aids.size() != count) {
    throw IndexFormatError("aid sidecar has " + std::to_string(aids.size()) +
                           " entries, expected " + std::to_string(count));
  }

  VectorIndex index;
  const char* cursor = blob.data() + 20;
  for (std::size_t i = 0; i < count; ++i) {
    EmbeddingVector vec;
    vec.components.resize(dim32);
    std::memcpy(vec.components.data(), cursor, dim32 * 4u);
    cursor += dim32 * 4u;
    index.add(aids[i], vec);
  }
  return index;
}

}  // namespace assaygen::embedding
