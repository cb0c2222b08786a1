#pragma once

// Pipeline orchestration behind the assaygen binary: a single JSON run
// configuration, run directories content-addressed by the config digest,
// per-command manifests, and the six command implementations.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "assaygen/errors.hpp"
#include "assaygen/eval.hpp"
#include "assaygen/llm.hpp"
#include "assaygen/retrieval.hpp"

namespace assaygen::cli {

struct QueryConfig {
  std::string id = "target";      // names per-target artifact directories
  std::string description;        // inline text...
  std::string description_file;   // ...or a file holding it (exactly one)
  std::vector<std::string> excluded_uniprot_ids;
  std::string mode = "keywords";  // or "full-description"
};

struct EvalInputs {
  std::string scores_file;    // imported score table (SMILES,KIND,VALUE)
  std::string baseline_file;  // baseline table; its vina rows become the
                              // improvement baseline
  std::optional<double> reference_score;  // high-affinity cutoff
  std::string receptor;                   // passed through to the tool
  eval::ToolConfig tool;  // empty executable disables the tool path
};

struct RunConfig {
  // ingest source: a directory of .json documents or one .jsonl file
  std::string assays;
  std::string store_dir;
  std::string index_file;
  std::string template_dir;
  std::string output_dir;

  retrieval::Hyperparameters hp;

  llm::ProviderConfig generator;
  llm::ProviderConfig summarizer;
  llm::ProviderConfig embedder;
  std::vector<llm::ProviderConfig> assessors;

  std::optional<long long> seed;  // required; runs never seed from the clock
  QueryConfig query;
  std::optional<QueryConfig> counter_query;  // optimization anti-target
  EvalInputs eval;
};

// Parses the JSON config text. Unknown or mistyped keys anywhere are
// ConfigError; absent sections keep their defaults. Path checks belong to
// validate().
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Command-line overrides applied before validation.
struct Overrides {
  std::optional<long long> seed;
  bool mock_llm = false;      // force every provider to the mock
  std::string targets_file;   // batch mode: one query record per line
  int parallel = 1;           // worker threads for batch evaluation
};

// One batch-mode record. scores_file and reference_score override the eval
// section for this target only.
struct TargetSpec {
  std::string id;
  QueryConfig query;
  std::string scores_file;
  std::optional<double> reference_score;
};

// JSONL, one object per non-empty line with the QueryConfig keys plus
// scores_file and reference_score. Ids must be unique and filesystem-safe.
std::vector<TargetSpec> parse_targets(const std::string& jsonl_text);

// Enforces the config invariants: seed present, hyperparameters and
// providers well-formed, the query exactly specified, and every referenced
// input path (template files, assay source, description/score/baseline
// files, tool executable) existing now. Output locations (store dir, index
// file, output dir) are created by their commands; their absence surfaces
// later as MissingArtifact. Throws ConfigError.
void validate(const RunConfig& config);

// fnv-1a over the canonical serialization of the effective config, plus the
// targets file content when present. Names the run directory, so identical
// inputs land in identical locations.
std::string config_digest(const RunConfig& config,
                          const std::string& targets_content = {});

struct RunContext {
  RunConfig config;
  std::vector<TargetSpec> targets;  // empty = single-target mode
  int parallel = 1;
  std::string digest;
};

// Applies overrides, validates, resolves description files, loads the
// targets file, and computes the digest.
RunContext make_context(RunConfig config, const Overrides& overrides);

// <output_dir>/run_<digest>; every command keeps its artifacts underneath.
std::filesystem::path run_dir(const RunContext& ctx);

// Commands. Each writes its artifacts plus a manifest.json recording the
// config digest, seed, template digests, and provider ids, then returns the
// one-line summary printed on stdout. Errors are thrown; run_cli maps them
// to exit codes.
std::string cmd_ingest(const RunContext& ctx);
std::string cmd_index(const RunContext& ctx);
std::string cmd_retrieve(const RunContext& ctx);
std::string cmd_generate(const RunContext& ctx);
std::string cmd_optimize(const RunContext& ctx);
std::string cmd_evaluate(const RunContext& ctx);

// 2 for provider/tool failures (ProviderError, AuthError, RateLimited,
// Timeout, ToolNotFound, ToolCrash, UnparseableOutput), 1 for everything
// else (validation and data errors).
int exit_code_for(const Error& error);

// Argument front end: subcommands ingest/index/retrieve/generate/optimize/
// evaluate with flags --config, --seed, --mock-llm, --targets, --parallel.
// Returns the process exit code: 0 success, 1 validation error, 2
// provider/tool error.
int run_cli(int argc, const char* const* argv);

}  // namespace assaygen::cli
