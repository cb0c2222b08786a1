#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/generation.hpp"
#include "assaygen/util.hpp"

using namespace assaygen;
namespace fs = std::filesystem;

namespace {

const std::string kTemplateDir = std::string(ASSAYGEN_REPO_DIR) + "/templates";

llm::ProviderConfig mock_config() {
  llm::ProviderConfig config;
  config.provider = "mock";
  return config;
}

std::string spans(const std::vector<std::string>& entries, int start = 1) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += std::to_string(start + static_cast<int>(i)) + ". [BOS] " +
           entries[i] + " [EOS]\n";
  }
  return out;
}

context::GenerationPrompt prompt_of(const std::string& text) {
  context::GenerationPrompt prompt;
  prompt.template_id = "generation";
  prompt.rendered_text = text;
  return prompt;
}

std::vector<chem::Molecule> ten_molecules() {
  std::vector<chem::Molecule> mols;
  for (int i = 1; i <= 10; ++i) {
    mols.push_back(chem::parse_smiles("C" + std::string(
        static_cast<std::size_t>(i), 'C')));
  }
  return mols;
}

struct ScopedServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    REQUIRE(server.is_running());
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port);
  }

  ~ScopedServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

std::string chat_body(const std::string& content) {
  nlohmann::json body;
  body["choices"] = {{{"message", {{"content", content}}}}};
  return body.dump();
}

}  // namespace

TEST_CASE("parse_generation reads numbered [BOS]/[EOS] spans") {
  SUBCASE("ten well-formed spans in order") {
    std::vector<std::string> inputs;
    for (int i = 1; i <= 10; ++i) {
      inputs.push_back("C" + std::string(static_cast<std::size_t>(i), 'C'));
    }
    auto result = generation::parse_generation(spans(inputs));
    REQUIRE(result.entries.size() == 10);
    CHECK(result.failures.empty());
    for (int i = 0; i < 10; ++i) {
      CHECK(result.entries[static_cast<std::size_t>(i)].ordinal == i + 1);
      CHECK(result.entries[static_cast<std::size_t>(i)].smiles ==
            inputs[static_cast<std::size_t>(i)]);
    }
  }

  SUBCASE("content is trimmed") {
    auto result = generation::parse_generation("[BOS]   CCO\t [EOS]");
    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].smiles == "CCO");
  }

  SUBCASE("a span missing its [EOS] fails without stealing the next span") {
    std::string raw;
    for (int i = 1; i <= 10; ++i) {
      if (i == 4) {
        raw += "4. [BOS] CCC\n";  // never closed
      } else {
        raw += std::to_string(i) + ". [BOS] C" +
               std::string(static_cast<std::size_t>(i), 'C') + " [EOS]\n";
      }
    }
    auto result = generation::parse_generation(raw);
    CHECK(result.entries.size() == 9);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].ordinal == 4);
    CHECK(result.failures[0].reason.find("nested [BOS]") !=
          std::string::npos);
    for (const auto& entry : result.entries) CHECK(entry.ordinal != 4);
  }

  SUBCASE("an unclosed final span fails at end of text") {
    auto result = generation::parse_generation("1. [BOS] CCO [EOS]\n2. [BOS] CC");
    CHECK(result.entries.size() == 1);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].ordinal == 2);
    CHECK(result.failures[0].reason.find("end of text") != std::string::npos);
  }

  SUBCASE("unnumbered spans take sequential ordinals") {
    auto result =
        generation::parse_generation("[BOS] C [EOS]\n[BOS] CC [EOS]");
    REQUIRE(result.entries.size() == 2);
    CHECK(result.entries[0].ordinal == 1);
    CHECK(result.entries[1].ordinal == 2);
  }

  SUBCASE("sequence continues after a written number") {
    auto result = generation::parse_generation(
        "7. [BOS] C [EOS]\n[BOS] CC [EOS]");
    REQUIRE(result.entries.size() == 2);
    CHECK(result.entries[0].ordinal == 7);
    CHECK(result.entries[1].ordinal == 8);
  }

  SUBCASE("numbers outside 1..10 fall back to sequence") {
    auto result = generation::parse_generation("12. [BOS] C [EOS]");
    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].ordinal == 1);
  }

  SUBCASE("markdown bold numbering is understood") {
    auto result = generation::parse_generation("**3.** [BOS] CCO [EOS]");
    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].ordinal == 3);
  }

  SUBCASE("the nearest preceding number wins") {
    auto result =
        generation::parse_generation("1 of 2: 5. [BOS] CCO [EOS]");
    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].ordinal == 5);
  }

  SUBCASE("spans beyond ten are recorded as failures") {
    std::vector<std::string> inputs;
    for (int i = 0; i < 12; ++i) {
      inputs.push_back("C" + std::string(static_cast<std::size_t>(i), 'C'));
    }
    auto result = generation::parse_generation(spans(inputs));
    CHECK(result.entries.size() == 10);
    CHECK(result.failures.size() == 2);
    for (const auto& failure : result.failures) {
      CHECK(failure.reason.find("excess") != std::string::npos);
    }
  }

  SUBCASE("no markers at all") {
    auto result = generation::parse_generation("just prose, no molecules");
    CHECK(result.entries.empty());
    CHECK(result.failures.empty());
  }
}

TEST_CASE("parse_generation is total over fuzzed marker soup") {
  std::mt19937_64 rng(0xdecafbad);
  const std::vector<std::string> pieces = {
      "[BOS]", "[EOS]", "[BOS", "BOS]", "[", "]", "1.", "10.", "11.", "0.",
      "C",     "CCO",   "\n",   " ",    ".",  ")", ":",  "x",   "99",  "[[BOS]]"};
  for (int trial = 0; trial < 100000; ++trial) {
    std::string raw;
    int parts = static_cast<int>(rng() % 12);
    for (int i = 0; i < parts; ++i) {
      raw += pieces[rng() % pieces.size()];
    }
    auto result = generation::parse_generation(raw);
    REQUIRE(result.entries.size() <= 10);
    for (const auto& entry : result.entries) {
      REQUIRE(entry.ordinal >= 1);
      REQUIRE(entry.ordinal <= 10);
    }
  }
}

TEST_CASE("make_batch keeps chem-invalid entries out of valid_molecules") {
  auto batch = generation::make_batch(
      3, spans({"CCO", "C1CC", "CC(C", "c1ccccc1"}));
  CHECK(batch.batch_index == 3);
  CHECK(batch.parsed.size() == 4);
  REQUIRE(batch.valid_molecules.size() == 2);
  CHECK(batch.valid_molecules[0].canonical_smiles ==
        chem::parse_smiles("CCO").canonical_smiles);
  CHECK(batch.valid_molecules[1].canonical_smiles ==
        chem::parse_smiles("c1ccccc1").canonical_smiles);
}

TEST_CASE("validity follows the unique-parsable formula") {
  // Batch A: ten parsable alkanes. Batch B: three repeats, six new amines,
  // one syntactically invalid string. 17 unique, 16 parse.
  std::vector<std::string> batch_a;
  for (int i = 1; i <= 10; ++i) {
    batch_a.push_back("C" + std::string(static_cast<std::size_t>(i - 1), 'C'));
  }
  std::vector<std::string> batch_b = {"C",      "CC",    "CCC",
                                      "N",      "CN",    "CCN",
                                      "CCCN",   "CCCCN", "CCCCCN",
                                      "C1CC"};

  generation::GenerationRun run;
  run.batches.push_back(generation::make_batch(0, spans(batch_a)));
  run.batches.push_back(generation::make_batch(1, spans(batch_b)));
  generation::finalize_run(run);

  CHECK(run.unique_generated == 17);
  CHECK(run.unique_canonical.size() == 16);
  CHECK(run.validity == doctest::Approx(16.0 / 17.0).epsilon(1e-9));
  CHECK(run.validity == doctest::Approx(0.9412).epsilon(1e-3));

  SUBCASE("duplicate spellings of one molecule count once") {
    run.batches.push_back(generation::make_batch(2, spans({"OCC", "CCO"})));
    generation::finalize_run(run);
    CHECK(run.unique_canonical.count(
              chem::parse_smiles("CCO").canonical_smiles) == 1);
    CHECK(run.unique_generated == 18);  // one new molecule, two spellings
  }

  SUBCASE("an empty run has validity zero") {
    generation::GenerationRun empty;
    generation::finalize_run(empty);
    CHECK(empty.unique_generated == 0);
    CHECK(empty.validity == 0.0);
  }
}

TEST_CASE("run_generation reaches 16/17 validity on a pinned fixture") {
  std::string prompt_text = "GENFIX batch prompt";
  std::vector<std::string> batch_a;
  for (int i = 1; i <= 10; ++i) {
    batch_a.push_back("C" + std::string(static_cast<std::size_t>(i - 1), 'C'));
  }
  std::vector<std::string> batch_b = {"C",    "CC",    "CCC",   "N",  "CN",
                                      "CCN",  "CCCN",  "CCCCN", "CCCCCN",
                                      "C1CC"};
  nlohmann::json table;
  table["by_hash"][to_hex(fnv1a64(prompt_text))] = spans(batch_a);
  table["by_hash"][to_hex(fnv1a64(prompt_text + "\n#sample:1"))] =
      spans(batch_b);
  fs::path path = fs::temp_directory_path() / "assaygen_gen_fixture_17.json";
  std::ofstream(path) << table.dump();

  llm::Gateway gateway(5);
  auto config = mock_config();
  config.fixtures_path = path.string();
  retrieval::Hyperparameters hp;
  hp.total_molecules = 20;
  hp.batch_size = 10;

  auto run = generation::run_generation(prompt_of(prompt_text), hp, gateway,
                                        config, 0, "fixture-target");
  CHECK_FALSE(run.aborted);
  REQUIRE(run.batches.size() == 2);
  CHECK(run.unique_generated == 17);
  CHECK(run.unique_canonical.size() == 16);
  CHECK(run.validity == doctest::Approx(16.0 / 17.0).epsilon(1e-9));
}

TEST_CASE("run_generation issues ceil(total/batch) distinct mock calls") {
  fs::path log = fs::temp_directory_path() / "assaygen_gen_calls.jsonl";
  fs::remove(log);
  llm::Gateway gateway(21, log.string());
  auto config = mock_config();
  retrieval::Hyperparameters hp;  // total 100, batch 10

  // A prompt that routes to the mock's generation family.
  auto prompt = prompt_of(
      "Each generated molecule should be enclosed within [BOS] and [EOS].");
  auto run = generation::run_generation(prompt, hp, gateway, config, 9,
                                        "mock-target");
  CHECK_FALSE(run.aborted);
  CHECK(run.batches.size() == 10);

  std::ifstream in(log);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 10);

  // Batches must differ: distinct sample indices drive distinct replies.
  std::set<std::string> raw_texts;
  for (const auto& batch : run.batches) raw_texts.insert(batch.raw_text);
  CHECK(raw_texts.size() == 10);
  CHECK(run.unique_generated > 10);

  CHECK(run.validity >= 0.0);
  CHECK(run.validity <= 1.0);
  for (const auto& batch : run.batches) {
    CHECK(batch.parsed.size() == 10);
    for (const auto& mol : batch.valid_molecules) {
      CHECK(mol.canonical_smiles ==
            chem::parse_smiles(mol.canonical_smiles).canonical_smiles);
    }
  }
  for (const auto& smiles : run.unique_canonical) {
    CHECK(chem::parse_smiles(smiles).canonical_smiles == smiles);
  }

  SUBCASE("odd totals round the call count up") {
    retrieval::Hyperparameters odd = hp;
    odd.total_molecules = 25;
    odd.batch_size = 10;
    auto extra = generation::run_generation(prompt, odd, gateway, config, 9);
    CHECK(extra.batches.size() == 3);
  }
}

TEST_CASE("run_generation is deterministic per seed") {
  auto prompt = prompt_of("molecules enclosed in [BOS] markers");
  retrieval::Hyperparameters hp;
  hp.total_molecules = 30;
  hp.batch_size = 10;
  auto config = mock_config();

  llm::Gateway first(33);
  llm::Gateway second(33);
  llm::Gateway third(34);

  auto a = generation::run_generation(prompt, hp, first, config, 2, "t");
  auto b = generation::run_generation(prompt, hp, second, config, 2, "t");
  auto c = generation::run_generation(prompt, hp, third, config, 2, "t");
  auto d = generation::run_generation(prompt, hp, first, config, 3, "t");

  CHECK(generation::run_digest(a) == generation::run_digest(b));
  CHECK(generation::run_digest(a) != generation::run_digest(c));
  CHECK(generation::run_digest(a) != generation::run_digest(d));
}

TEST_CASE("run_generation keeps partial batches when the provider fails") {
  ScopedServer server;
  std::atomic<int> hits{0};
  std::string good = spans({"CCO", "CCN", "CCC"});
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       if (hits.fetch_add(1) == 0) {
                         res.set_content(chat_body(good), "application/json");
                       } else {
                         res.status = 500;
                         res.set_content("overloaded", "text/plain");
                       }
                     });
  server.start();

  llm::ProviderConfig config;
  config.provider = "http";
  config.base_url = server.url() + "/v1";
  config.model_id = "m";
  config.max_retries = 0;

  llm::Gateway gateway(1);
  retrieval::Hyperparameters hp;
  hp.total_molecules = 30;
  hp.batch_size = 10;
  auto run = generation::run_generation(prompt_of("p"), hp, gateway, config,
                                        0, "flaky");
  CHECK(run.aborted);
  CHECK(run.abort_kind == "ProviderError");
  REQUIRE(run.batches.size() == 1);
  CHECK(run.batches[0].parsed.size() == 3);
  CHECK(run.unique_canonical.size() == 3);
  CHECK(run.validity == doctest::Approx(1.0));
}

TEST_CASE("optimize_against_countertarget pairs outputs by ordinal") {
  auto molecules = ten_molecules();
  llm::Gateway gateway(12);

  SUBCASE("mock round trip produces ten pairs") {
    auto config = mock_config();
    auto pairs = generation::optimize_against_countertarget(
        molecules, "hERG potassium channel", {}, gateway, config,
        kTemplateDir);
    REQUIRE(pairs.size() == 10);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].original.canonical_smiles ==
            molecules[i].canonical_smiles);
      if (pairs[i].fell_back) {
        CHECK(pairs[i].optimized.canonical_smiles ==
              pairs[i].original.canonical_smiles);
      } else {
        CHECK_FALSE(pairs[i].optimized.canonical_smiles.empty());
      }
    }
  }

  SUBCASE("invalid and missing ordinals fall back to the original") {
    std::string reply;
    for (int i = 1; i <= 10; ++i) {
      if (i == 4) continue;  // ordinal 4 missing entirely
      std::string smiles =
          i == 7 ? "C1CC" : "N" + std::string(static_cast<std::size_t>(i), 'C');
      reply += std::to_string(i) + ". [BOS] " + smiles + " [EOS]\n";
    }
    nlohmann::json table;
    table["by_contains"] = {{{"needle", "OPTFIXMARK"}, {"reply", reply}}};
    fs::path path = fs::temp_directory_path() / "assaygen_gen_optfix.json";
    std::ofstream(path) << table.dump();
    auto config = mock_config();
    config.fixtures_path = path.string();

    auto pairs = generation::optimize_against_countertarget(
        molecules, "OPTFIXMARK counter target", {}, gateway, config,
        kTemplateDir);
    REQUIRE(pairs.size() == 10);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      bool expect_fallback = i + 1 == 4 || i + 1 == 7;
      CHECK(pairs[i].fell_back == expect_fallback);
      if (expect_fallback) {
        CHECK(pairs[i].optimized.canonical_smiles ==
              pairs[i].original.canonical_smiles);
      } else {
        CHECK(pairs[i].optimized.canonical_smiles ==
              chem::parse_smiles("N" + std::string(i + 1, 'C'))
                  .canonical_smiles);
      }
    }
  }

  SUBCASE("input batches must hold exactly ten molecules") {
    auto eight = molecules;
    eight.resize(8);
    auto config = mock_config();
    CHECK_THROWS_AS(generation::optimize_against_countertarget(
                        eight, "hERG", {}, gateway, config, kTemplateDir),
                    BatchSizeMismatch);
  }

  SUBCASE("gateway errors propagate") {
    llm::ProviderConfig config;
    config.provider = "http";
    config.base_url = "http://127.0.0.1:9";
    config.model_id = "m";
    config.max_retries = 0;
    config.request_timeout = 2.0;
    CHECK_THROWS_AS(generation::optimize_against_countertarget(
                        molecules, "hERG", {}, gateway, config, kTemplateDir),
                    ProviderError);
  }
}

TEST_CASE("save_run writes byte-stable artifacts") {
  auto prompt = prompt_of("artifact prompt with [BOS] markers");
  prompt.source_blocks = {11, 22};
  retrieval::Hyperparameters hp;
  hp.total_molecules = 20;
  hp.batch_size = 10;
  auto config = mock_config();

  llm::Gateway gateway(77);
  auto run = generation::run_generation(prompt, hp, gateway, config, 4,
                                        "artifact-target");

  fs::path dir = fs::temp_directory_path() / "assaygen_gen_artifacts";
  fs::remove_all(dir);
  generation::save_run(run, prompt, hp, dir.string());

  CHECK(fs::exists(dir / "prompt.txt"));
  CHECK(fs::exists(dir / "batch_0.txt"));
  CHECK(fs::exists(dir / "batch_1.txt"));
  CHECK(fs::exists(dir / "molecules.txt"));

  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest.at("target_id") == "artifact-target");
  CHECK(manifest.at("seed") == 4);
  CHECK(manifest.at("batches") == 2);
  CHECK(manifest.at("dedup_policy") == "canonical-dedup-then-metrics");
  CHECK(manifest.at("unique_parsable") == run.unique_canonical.size());
  CHECK(manifest.at("digest") == generation::run_digest(run));

  std::string molecules = read_file(dir / "molecules.txt");
  std::size_t line_count = 0;
  for (char c : molecules) line_count += c == '\n';
  CHECK(line_count == run.unique_canonical.size());

  llm::Gateway again(77);
  auto rerun = generation::run_generation(prompt, hp, again, config, 4,
                                          "artifact-target");
  fs::path dir2 = fs::temp_directory_path() / "assaygen_gen_artifacts_2";
  fs::remove_all(dir2);
  generation::save_run(rerun, prompt, hp, dir2.string());
  CHECK(read_file(dir / "manifest.json") == read_file(dir2 / "manifest.json"));
  CHECK(read_file(dir / "molecules.txt") ==
        read_file(dir2 / "molecules.txt"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
