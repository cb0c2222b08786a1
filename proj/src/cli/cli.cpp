#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "assaygen/bioassay.hpp"
#include "assaygen/chem.hpp"
#include "assaygen/cli.hpp"
#include "assaygen/context.hpp"
#include "assaygen/embedding.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/generation.hpp"
#include "assaygen/templates.hpp"
#include "assaygen/util.hpp"

namespace assaygen::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr templates::Id kAllTemplates[] = {
    templates::Id::kSummarization, templates::Id::kGeneration,
    templates::Id::kRelevance, templates::Id::kAblation,
    templates::Id::kOptimization};

std::string join_field(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

const ordered_json& require_object(const ordered_json& j,
                                   const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  return j;
}

void check_keys(const ordered_json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (std::string_view name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(join_field(where, item.key()), "unknown key");
  }
}

template <typename T>
void read_field(const ordered_json& obj, const std::string& where,
                const std::string& key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const ordered_json::exception&) {
    throw ConfigError(join_field(where, key), "wrong type");
  }
}

llm::ProviderConfig parse_provider(const ordered_json& j,
                                   const std::string& where) {
  require_object(j, where);
  check_keys(j, where,
             {"provider", "base_url", "api_key_env", "model_id",
              "request_timeout", "max_retries", "rate_per_second",
              "backoff_initial_ms", "fixtures_path", "mock_dim"});
  llm::ProviderConfig config;
  read_field(j, where, "provider", config.provider);
  read_field(j, where, "base_url", config.base_url);
  read_field(j, where, "api_key_env", config.api_key_env);
  read_field(j, where, "model_id", config.model_id);
  read_field(j, where, "request_timeout", config.request_timeout);
  read_field(j, where, "max_retries", config.max_retries);
  read_field(j, where, "rate_per_second", config.rate_per_second);
  read_field(j, where, "backoff_initial_ms", config.backoff_initial_ms);
  read_field(j, where, "fixtures_path", config.fixtures_path);
  read_field(j, where, "mock_dim", config.mock_dim);
  return config;
}

QueryConfig parse_query_config(const ordered_json& j,
                               const std::string& where) {
  require_object(j, where);
  check_keys(j, where,
             {"id", "description", "description_file", "excluded_uniprot_ids",
              "mode"});
  QueryConfig q;
  read_field(j, where, "id", q.id);
  read_field(j, where, "description", q.description);
  read_field(j, where, "description_file", q.description_file);
  read_field(j, where, "excluded_uniprot_ids", q.excluded_uniprot_ids);
  read_field(j, where, "mode", q.mode);
  return q;
}

bool safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char ch : id) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' &&
        ch != '_' && ch != '-') {
      return false;
    }
  }
  return true;
}

void validate_query(const QueryConfig& q, const std::string& where) {
  if (!safe_id(q.id)) {
    throw ConfigError(where + ".id",
                      "must be non-empty and filesystem-safe "
                      "(letters, digits, '.', '_', '-')");
  }
  bool inline_text = !q.description.empty();
  bool from_file = !q.description_file.empty();
  if (inline_text && from_file) {
    throw ConfigError(where + ".description",
                      "give either inline text or description_file, not both");
  }
  if (!inline_text && !from_file) {
    throw ConfigError(where + ".description",
                      "required (inline or description_file)");
  }
  if (from_file && !fs::exists(q.description_file)) {
    throw ConfigError(where + ".description_file",
                      "does not exist: " + q.description_file);
  }
  if (q.mode != "keywords" && q.mode != "full-description") {
    throw ConfigError(where + ".mode", "expected keywords or full-description");
  }
}

void validate_provider(const llm::ProviderConfig& p, const std::string& where) {
  if (p.provider != "mock" && p.provider != "http") {
    throw ConfigError(where + ".provider", "expected mock or http");
  }
  if (p.provider == "http" && p.base_url.empty()) {
    throw ConfigError(where + ".base_url", "required for the http provider");
  }
  if (p.request_timeout <= 0) {
    throw ConfigError(where + ".request_timeout", "must be positive");
  }
  if (p.max_retries < 0 || p.max_retries > 8) {
    throw ConfigError(where + ".max_retries", "must be in 0..8");
  }
  if (p.rate_per_second < 0) {
    throw ConfigError(where + ".rate_per_second", "must be non-negative");
  }
  if (p.backoff_initial_ms <= 0) {
    throw ConfigError(where + ".backoff_initial_ms", "must be positive");
  }
  if (p.mock_dim <= 0) {
    throw ConfigError(where + ".mock_dim", "must be positive");
  }
  if (!p.fixtures_path.empty() && !fs::exists(p.fixtures_path)) {
    throw ConfigError(where + ".fixtures_path",
                      "does not exist: " + p.fixtures_path);
  }
}

void require_nonempty(const std::string& value, const std::string& field) {
  if (value.empty()) throw ConfigError(field, "required");
}

void resolve_query_file(QueryConfig& q, const std::string& where) {
  if (q.description_file.empty()) return;
  q.description = trim(read_file(q.description_file));
  if (q.description.empty()) {
    throw ConfigError(where + ".description_file", "file is empty");
  }
}

ordered_json provider_json(const llm::ProviderConfig& p) {
  ordered_json j;
  j["provider"] = p.provider;
  j["base_url"] = p.base_url;
  j["api_key_env"] = p.api_key_env;
  j["model_id"] = p.model_id;
  j["request_timeout"] = p.request_timeout;
  j["max_retries"] = p.max_retries;
  j["rate_per_second"] = p.rate_per_second;
  j["backoff_initial_ms"] = p.backoff_initial_ms;
  j["fixtures_path"] = p.fixtures_path;
  j["mock_dim"] = p.mock_dim;
  return j;
}

ordered_json query_json(const QueryConfig& q) {
  ordered_json j;
  j["id"] = q.id;
  j["description"] = q.description;
  j["excluded_uniprot_ids"] = q.excluded_uniprot_ids;
  j["mode"] = q.mode;
  return j;
}

// Canonical serialization of the effective config: resolved description
// text, no description_file paths, every default written out. Identical
// inputs serialize identically however they were spelled.
ordered_json effective_config_json(const RunConfig& c) {
  ordered_json j;
  ordered_json paths;
  paths["assays"] = c.assays;
  paths["store_dir"] = c.store_dir;
  paths["index_file"] = c.index_file;
  paths["template_dir"] = c.template_dir;
  paths["output_dir"] = c.output_dir;
  j["paths"] = std::move(paths);
  ordered_json hp;
  hp["max_assay_num"] = c.hp.max_assay_num;
  hp["n_mol"] = c.hp.n_mol;
  hp["max_mol_size"] = c.hp.max_mol_size;
  hp["min_mol_num"] = c.hp.min_mol_num;
  hp["retrieval_k"] = c.hp.retrieval_k;
  hp["batch_size"] = c.hp.batch_size;
  hp["total_molecules"] = c.hp.total_molecules;
  j["hyperparameters"] = std::move(hp);
  ordered_json providers;
  providers["generator"] = provider_json(c.generator);
  providers["summarizer"] = provider_json(c.summarizer);
  providers["embedder"] = provider_json(c.embedder);
  ordered_json assessors = ordered_json::array();
  for (const auto& a : c.assessors) assessors.push_back(provider_json(a));
  providers["assessors"] = std::move(assessors);
  j["providers"] = std::move(providers);
  j["seed"] = c.seed.value_or(0);
  j["query"] = query_json(c.query);
  if (c.counter_query) j["counter_query"] = query_json(*c.counter_query);
  ordered_json ev;
  ev["scores_file"] = c.eval.scores_file;
  ev["baseline_file"] = c.eval.baseline_file;
  if (c.eval.reference_score) {
    ev["reference_score"] = *c.eval.reference_score;
  } else {
    ev["reference_score"] = nullptr;
  }
  ev["receptor"] = c.eval.receptor;
  ordered_json tool;
  tool["executable"] = c.eval.tool.executable;
  tool["extra_args"] = c.eval.tool.extra_args;
  ev["tool"] = std::move(tool);
  j["eval"] = std::move(ev);
  return j;
}

ordered_json targets_json(const std::vector<TargetSpec>& targets) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : targets) {
    ordered_json j;
    j["id"] = t.id;
    j["query"] = query_json(t.query);
    j["scores_file"] = t.scores_file;
    if (t.reference_score) {
      j["reference_score"] = *t.reference_score;
    } else {
      j["reference_score"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_file(path, j.dump(2) + "\n");
}

ordered_json load_json(const fs::path& path) {
  ordered_json j = ordered_json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw Error("ArtifactFormatError", path.string() + " is not valid JSON");
  }
  return j;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty()) lines.push_back(std::move(t));
  }
  return lines;
}

std::uint64_t seed_of(const RunContext& ctx) {
  return static_cast<std::uint64_t>(*ctx.config.seed);
}

struct CommandDirs {
  fs::path run;
  fs::path cmd;
};

CommandDirs prepare_dirs(const RunContext& ctx, const std::string& command) {
  CommandDirs dirs{run_dir(ctx), run_dir(ctx) / command};
  fs::create_directories(dirs.cmd);
  write_json(dirs.run / "config.json", effective_config_json(ctx.config));
  return dirs;
}

// The gateway appends to its call log; drop the previous run's log so a
// rerun leaves identical artifacts behind.
std::string fresh_call_log(const CommandDirs& dirs) {
  fs::path log = dirs.cmd / "calls.jsonl";
  std::error_code ec;
  fs::remove(log, ec);
  return log.string();
}

ordered_json manifest_base(const RunContext& ctx, const std::string& command) {
  const RunConfig& c = ctx.config;
  ordered_json m;
  m["command"] = command;
  m["config_digest"] = ctx.digest;
  m["seed"] = *c.seed;
  ordered_json tdig;
  for (templates::Id id : kAllTemplates) {
    std::string name = templates::file_name(id);
    tdig[name] = to_hex(fnv1a64(read_file(fs::path(c.template_dir) / name)));
  }
  m["template_digests"] = std::move(tdig);
  ordered_json providers;
  providers["generator"] = c.generator.model_id;
  providers["summarizer"] = c.summarizer.model_id;
  providers["embedder"] = c.embedder.model_id;
  ordered_json assessors = ordered_json::array();
  for (const auto& a : c.assessors) assessors.push_back(a.model_id);
  providers["assessors"] = std::move(assessors);
  m["providers"] = std::move(providers);
  return m;
}

bioassay::Store open_store(const RunConfig& c) {
  if (!fs::exists(fs::path(c.store_dir) / "manifest.json")) {
    throw MissingArtifact("ingest");
  }
  return bioassay::Store::load(c.store_dir);
}

embedding::VectorIndex open_index(const RunConfig& c) {
  if (!fs::exists(c.index_file)) throw MissingArtifact("index");
  return embedding::VectorIndex::load(c.index_file);
}

retrieval::QuerySpec to_query_spec(const QueryConfig& qc) {
  retrieval::QuerySpec q;
  q.description = qc.description;
  q.mode = qc.mode;
  q.excluded_uniprot_ids.insert(qc.excluded_uniprot_ids.begin(),
                                qc.excluded_uniprot_ids.end());
  return q;
}

std::vector<TargetSpec> effective_targets(const RunContext& ctx) {
  if (!ctx.targets.empty()) return ctx.targets;
  TargetSpec solo;
  solo.id = ctx.config.query.id;
  solo.query = ctx.config.query;
  return {solo};
}

fs::path target_dir(const CommandDirs& dirs, const RunContext& ctx,
                    const TargetSpec& t) {
  return ctx.targets.empty() ? dirs.cmd : dirs.cmd / t.id;
}

fs::path stage_dir(const CommandDirs& dirs, const RunContext& ctx,
                   const std::string& stage, const TargetSpec& t) {
  fs::path base = dirs.run / stage;
  return ctx.targets.empty() ? base : base / t.id;
}

retrieval::RelevanceGroup group_from_label(const std::string& label) {
  if (label == "High") return retrieval::RelevanceGroup::kHigh;
  if (label == "Medium") return retrieval::RelevanceGroup::kMedium;
  if (label == "Low") return retrieval::RelevanceGroup::kLow;
  if (label == "No") return retrieval::RelevanceGroup::kNo;
  throw Error("ArtifactFormatError", "unknown relevance group: " + label);
}

// Fills keywords when the query runs in keywords mode, then validates.
retrieval::QuerySpec prepared_query(const QueryConfig& qc, llm::Gateway& gateway,
                                    const RunConfig& c) {
  retrieval::QuerySpec q = to_query_spec(qc);
  if (q.mode == "keywords") {
    q.keywords = retrieval::extract_keywords(q.description, gateway,
                                             c.summarizer);
  }
  q.validate();
  return q;
}

// Summaries plus sampled activity tables for every retrieved assay that
// survives the context gates, in retrieval order.
std::vector<context::AssayContextBlock> build_blocks(
    const std::vector<bioassay::BioAssayRecord>& kept,
    const std::map<long long, double>& similarity,
    const retrieval::QuerySpec& q, llm::Gateway& gateway, const RunConfig& c,
    std::mt19937_64& rng) {
  std::vector<context::AssayContextBlock> blocks;
  for (const auto& record : kept) {
    context::AssaySummary summary = context::summarize_assay(
        record, q, gateway, c.summarizer, c.template_dir);
    double sim = 0.0;
    auto it = similarity.find(record.aid);
    if (it != similarity.end()) sim = it->second;
    std::optional<context::AssayContextBlock> block =
        context::make_block(record, summary, sim, c.hp, rng);
    if (block) blocks.push_back(std::move(*block));
  }
  return blocks;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  ordered_json root = ordered_json::parse(json_text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config", "not valid JSON");
  require_object(root, "config");
  check_keys(root, "",
             {"paths", "hyperparameters", "providers", "seed", "query",
              "counter_query", "eval"});
  RunConfig config;
  if (root.contains("paths")) {
    const ordered_json& p = require_object(root.at("paths"), "paths");
    check_keys(p, "paths",
               {"assays", "store_dir", "index_file", "template_dir",
                "output_dir"});
    read_field(p, "paths", "assays", config.assays);
    read_field(p, "paths", "store_dir", config.store_dir);
    read_field(p, "paths", "index_file", config.index_file);
    read_field(p, "paths", "template_dir", config.template_dir);
    read_field(p, "paths", "output_dir", config.output_dir);
  }
  if (root.contains("hyperparameters")) {
    const ordered_json& h =
        require_object(root.at("hyperparameters"), "hyperparameters");
    check_keys(h, "hyperparameters",
               {"max_assay_num", "n_mol", "max_mol_size", "min_mol_num",
                "retrieval_k", "batch_size", "total_molecules"});
    read_field(h, "hyperparameters", "max_assay_num", config.hp.max_assay_num);
    read_field(h, "hyperparameters", "n_mol", config.hp.n_mol);
    read_field(h, "hyperparameters", "max_mol_size", config.hp.max_mol_size);
    read_field(h, "hyperparameters", "min_mol_num", config.hp.min_mol_num);
    read_field(h, "hyperparameters", "retrieval_k", config.hp.retrieval_k);
    read_field(h, "hyperparameters", "batch_size", config.hp.batch_size);
    read_field(h, "hyperparameters", "total_molecules",
               config.hp.total_molecules);
  }
  if (root.contains("providers")) {
    const ordered_json& p = require_object(root.at("providers"), "providers");
    check_keys(p, "providers",
               {"generator", "summarizer", "embedder", "assessors"});
    if (p.contains("generator")) {
      config.generator = parse_provider(p.at("generator"),
                                        "providers.generator");
    }
    if (p.contains("summarizer")) {
      config.summarizer = parse_provider(p.at("summarizer"),
                                         "providers.summarizer");
    }
    if (p.contains("embedder")) {
      config.embedder = parse_provider(p.at("embedder"), "providers.embedder");
    }
    if (p.contains("assessors")) {
      const ordered_json& arr = p.at("assessors");
      if (!arr.is_array()) {
        throw ConfigError("providers.assessors", "expected an array");
      }
      for (std::size_t i = 0; i < arr.size(); ++i) {
        config.assessors.push_back(parse_provider(
            arr[i], "providers.assessors[" + std::to_string(i) + "]"));
      }
    }
  }
  if (root.contains("seed")) {
    long long seed = 0;
    read_field(root, "", "seed", seed);
    config.seed = seed;
  }
  if (root.contains("query")) {
    config.query = parse_query_config(root.at("query"), "query");
  }
  if (root.contains("counter_query")) {
    config.counter_query =
        parse_query_config(root.at("counter_query"), "counter_query");
  }
  if (root.contains("eval")) {
    const ordered_json& e = require_object(root.at("eval"), "eval");
    check_keys(e, "eval",
               {"scores_file", "baseline_file", "reference_score", "receptor",
                "tool"});
    read_field(e, "eval", "scores_file", config.eval.scores_file);
    read_field(e, "eval", "baseline_file", config.eval.baseline_file);
    if (e.contains("reference_score")) {
      double ref = 0.0;
      read_field(e, "eval", "reference_score", ref);
      config.eval.reference_score = ref;
    }
    read_field(e, "eval", "receptor", config.eval.receptor);
    if (e.contains("tool")) {
      const ordered_json& t = require_object(e.at("tool"), "eval.tool");
      check_keys(t, "eval.tool", {"executable", "extra_args"});
      read_field(t, "eval.tool", "executable", config.eval.tool.executable);
      read_field(t, "eval.tool", "extra_args", config.eval.tool.extra_args);
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) {
    throw ConfigError("config", "does not exist: " + path);
  }
  return parse_config(read_file(path));
}

std::vector<TargetSpec> parse_targets(const std::string& jsonl_text) {
  std::vector<TargetSpec> targets;
  std::set<std::string> seen;
  std::istringstream in(jsonl_text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty()) continue;
    std::string where = "targets line " + std::to_string(line_no);
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(where, "not valid JSON");
    require_object(j, where);
    check_keys(j, where,
               {"id", "description", "description_file",
                "excluded_uniprot_ids", "mode", "scores_file",
                "reference_score"});
    TargetSpec spec;
    read_field(j, where, "id", spec.query.id);
    read_field(j, where, "description", spec.query.description);
    read_field(j, where, "description_file", spec.query.description_file);
    read_field(j, where, "excluded_uniprot_ids",
               spec.query.excluded_uniprot_ids);
    read_field(j, where, "mode", spec.query.mode);
    read_field(j, where, "scores_file", spec.scores_file);
    if (j.contains("reference_score")) {
      double ref = 0.0;
      read_field(j, where, "reference_score", ref);
      spec.reference_score = ref;
    }
    if (!j.contains("id")) throw ConfigError(where + ".id", "required");
    validate_query(spec.query, where);
    resolve_query_file(spec.query, where);
    if (!spec.scores_file.empty() && !fs::exists(spec.scores_file)) {
      throw ConfigError(where + ".scores_file",
                        "does not exist: " + spec.scores_file);
    }
    spec.id = spec.query.id;
    if (!seen.insert(spec.id).second) {
      throw ConfigError(where + ".id", "duplicate id " + spec.id);
    }
    targets.push_back(std::move(spec));
  }
  if (targets.empty()) throw ConfigError("targets", "no records");
  return targets;
}

void validate(const RunConfig& config) {
  if (!config.seed.has_value()) {
    throw ConfigError("seed", "required; runs never seed from the clock");
  }
  config.hp.validate();

  require_nonempty(config.store_dir, "paths.store_dir");
  require_nonempty(config.index_file, "paths.index_file");
  require_nonempty(config.template_dir, "paths.template_dir");
  require_nonempty(config.output_dir, "paths.output_dir");
  if (!fs::is_directory(config.template_dir)) {
    throw ConfigError("paths.template_dir",
                      "not a directory: " + config.template_dir);
  }
  for (templates::Id id : kAllTemplates) {
    std::string name = templates::file_name(id);
    if (!fs::exists(fs::path(config.template_dir) / name)) {
      throw ConfigError("paths.template_dir", "missing template " + name);
    }
  }
  if (!config.assays.empty() && !fs::exists(config.assays)) {
    throw ConfigError("paths.assays", "does not exist: " + config.assays);
  }

  validate_query(config.query, "query");
  if (config.counter_query) validate_query(*config.counter_query,
                                           "counter_query");

  validate_provider(config.generator, "providers.generator");
  validate_provider(config.summarizer, "providers.summarizer");
  validate_provider(config.embedder, "providers.embedder");
  for (std::size_t i = 0; i < config.assessors.size(); ++i) {
    validate_provider(config.assessors[i],
                      "providers.assessors[" + std::to_string(i) + "]");
  }

  if (!config.eval.scores_file.empty() &&
      !fs::exists(config.eval.scores_file)) {
    throw ConfigError("eval.scores_file",
                      "does not exist: " + config.eval.scores_file);
  }
  if (!config.eval.baseline_file.empty() &&
      !fs::exists(config.eval.baseline_file)) {
    throw ConfigError("eval.baseline_file",
                      "does not exist: " + config.eval.baseline_file);
  }
  if (!config.eval.tool.executable.empty() &&
      !fs::exists(config.eval.tool.executable)) {
    throw ConfigError("eval.tool.executable",
                      "does not exist: " + config.eval.tool.executable);
  }
}

std::string config_digest(const RunConfig& config,
                          const std::string& targets_content) {
  std::uint64_t h = fnv1a64(effective_config_json(config).dump());
  if (!targets_content.empty()) h = fnv1a64(targets_content, h);
  return to_hex(h);
}

RunContext make_context(RunConfig config, const Overrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.mock_llm) {
    config.generator.provider = "mock";
    config.summarizer.provider = "mock";
    config.embedder.provider = "mock";
    for (auto& a : config.assessors) a.provider = "mock";
  }
  if (overrides.parallel <= 0) {
    throw ConfigError("parallel", "must be positive");
  }
  validate(config);
  resolve_query_file(config.query, "query");
  if (config.counter_query) {
    resolve_query_file(*config.counter_query, "counter_query");
  }

  RunContext ctx;
  ctx.config = std::move(config);
  ctx.parallel = overrides.parallel;
  std::string targets_digest_input;
  if (!overrides.targets_file.empty()) {
    if (!fs::exists(overrides.targets_file)) {
      throw ConfigError("targets",
                        "does not exist: " + overrides.targets_file);
    }
    ctx.targets = parse_targets(read_file(overrides.targets_file));
    // Digest the resolved records, not the file bytes, so description files
    // named by records are covered by content.
    targets_digest_input = targets_json(ctx.targets).dump();
  }
  ctx.digest = config_digest(ctx.config, targets_digest_input);
  return ctx;
}

fs::path run_dir(const RunContext& ctx) {
  return fs::path(ctx.config.output_dir) / ("run_" + ctx.digest);
}

std::string cmd_ingest(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  if (c.assays.empty()) {
    throw ConfigError("paths.assays", "required by ingest");
  }
  CommandDirs dirs = prepare_dirs(ctx, "ingest");
  std::vector<std::string> documents;
  if (fs::is_directory(c.assays)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(c.assays)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) documents.push_back(read_file(p));
  } else {
    for (const auto& line : read_lines(c.assays)) documents.push_back(line);
  }
  bioassay::Store store;
  for (const auto& doc : documents) store.add(bioassay::ingest_assay(doc));
  store.save(c.store_dir);

  ordered_json m = manifest_base(ctx, "ingest");
  m["assays_ingested"] = store.size();
  m["store_dir"] = c.store_dir;
  write_json(dirs.cmd / "manifest.json", m);
  return "ingest: " + std::to_string(store.size()) + " assays -> " +
         c.store_dir;
}

std::string cmd_index(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  CommandDirs dirs = prepare_dirs(ctx, "index");
  bioassay::Store store = open_store(c);
  llm::Gateway gateway(seed_of(ctx), fresh_call_log(dirs));
  embedding::VectorIndex index;
  for (long long aid : store.aids()) {
    embedding::EmbeddingVector vector = embedding::embed_record(
        store.lookup(aid),
        [&](const std::string& text) {
          return gateway.embed_text(text, c.embedder);
        });
    index.add(aid, vector);
  }
  fs::path parent = fs::path(c.index_file).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  index.save(c.index_file);

  ordered_json m = manifest_base(ctx, "index");
  m["records_indexed"] = index.size();
  m["dim"] = index.dim();
  m["index_file"] = c.index_file;
  write_json(dirs.cmd / "manifest.json", m);
  return "index: " + std::to_string(index.size()) + " vectors (dim " +
         std::to_string(index.dim()) + ") -> " + c.index_file;
}

std::string cmd_retrieve(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  CommandDirs dirs = prepare_dirs(ctx, "retrieve");
  bioassay::Store store = open_store(c);
  embedding::VectorIndex index = open_index(c);
  llm::Gateway gateway(seed_of(ctx), fresh_call_log(dirs));

  std::vector<TargetSpec> targets = effective_targets(ctx);
  ordered_json manifest_targets = ordered_json::array();
  std::string single_summary;
  for (const TargetSpec& t : targets) {
    retrieval::QuerySpec q = prepared_query(t.query, gateway, c);
    embedding::EmbeddingVector query_vector =
        gateway.embed_text(q.retrieval_text(), c.embedder);
    std::vector<embedding::RetrievalHit> hits =
        index.top_k(query_vector, static_cast<std::size_t>(c.hp.retrieval_k));
    std::vector<bioassay::BioAssayRecord> kept =
        retrieval::filter_assays(hits, store, q, c.hp);
    std::vector<retrieval::RelevanceAssessment> assessments;
    for (const auto& record : kept) {
      assessments.push_back(retrieval::assess_relevance(
          record, q, gateway, c.assessors, c.template_dir));
    }
    retrieval::GroupResult group = retrieval::relevance_group(assessments);

    fs::path dir = target_dir(dirs, ctx, t);
    write_file(dir / "report.txt",
               retrieval::retrieval_report(q, c.hp, hits, kept, assessments,
                                           group));
    std::map<long long, double> similarity;
    for (const auto& hit : hits) similarity.emplace(hit.aid, hit.similarity);
    ordered_json rj;
    rj["target_id"] = t.id;
    ordered_json qj;
    qj["description"] = q.description;
    qj["keywords"] = q.keywords;
    qj["mode"] = q.mode;
    qj["excluded_uniprot_ids"] =
        std::vector<std::string>(q.excluded_uniprot_ids.begin(),
                                 q.excluded_uniprot_ids.end());
    rj["query"] = std::move(qj);
    ordered_json hits_json = ordered_json::array();
    for (const auto& hit : hits) {
      hits_json.push_back({{"aid", hit.aid}, {"similarity", hit.similarity}});
    }
    rj["hits"] = std::move(hits_json);
    ordered_json kept_json = ordered_json::array();
    for (const auto& record : kept) {
      kept_json.push_back(
          {{"aid", record.aid}, {"similarity", similarity.at(record.aid)}});
    }
    rj["kept"] = std::move(kept_json);
    ordered_json assessments_json = ordered_json::array();
    for (const auto& assessment : assessments) {
      ordered_json aj;
      aj["aid"] = assessment.aid;
      ordered_json votes = ordered_json::array();
      for (const auto& vote : assessment.votes) {
        votes.push_back(
            {{"model", vote.assessor_model}, {"relevant", vote.relevant}});
      }
      aj["votes"] = std::move(votes);
      ordered_json abstentions = ordered_json::array();
      for (const auto& abstention : assessment.abstentions) {
        abstentions.push_back({{"model", abstention.assessor_model},
                               {"reason", abstention.reason}});
      }
      aj["abstentions"] = std::move(abstentions);
      assessments_json.push_back(std::move(aj));
    }
    rj["assessments"] = std::move(assessments_json);
    ordered_json gj;
    gj["label"] = retrieval::group_name(group.group);
    gj["x"] = group.x;
    gj["relevant"] = group.relevant;
    gj["assessed"] = group.assessed;
    rj["group"] = std::move(gj);
    write_json(dir / "retrieved.json", rj);

    manifest_targets.push_back({{"id", t.id},
                                {"hits", hits.size()},
                                {"kept", kept.size()},
                                {"group", retrieval::group_name(group.group)}});
    single_summary = "retrieve: kept " + std::to_string(kept.size()) + " of " +
                     std::to_string(hits.size()) + " hits, relevance " +
                     retrieval::group_name(group.group);
  }

  ordered_json m = manifest_base(ctx, "retrieve");
  m["targets"] = std::move(manifest_targets);
  write_json(dirs.cmd / "manifest.json", m);
  if (ctx.targets.empty()) return single_summary;
  return "retrieve: " + std::to_string(targets.size()) + " targets";
}

std::string cmd_generate(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  CommandDirs dirs = prepare_dirs(ctx, "generate");
  bioassay::Store store = open_store(c);
  llm::Gateway gateway(seed_of(ctx), fresh_call_log(dirs));

  std::vector<TargetSpec> targets = effective_targets(ctx);
  ordered_json manifest_targets = ordered_json::array();
  std::size_t total_unique = 0;
  std::string single_summary;
  std::string abort_kind;
  std::string abort_message;
  for (const TargetSpec& t : targets) {
    fs::path retrieved_file =
        stage_dir(dirs, ctx, "retrieve", t) / "retrieved.json";
    if (!fs::exists(retrieved_file)) throw MissingArtifact("retrieve");
    ordered_json rj = load_json(retrieved_file);
    retrieval::QuerySpec q;
    std::vector<std::pair<long long, double>> kept;
    try {
      const ordered_json& qj = rj.at("query");
      q.description = qj.at("description").get<std::string>();
      q.keywords = qj.at("keywords").get<std::string>();
      q.mode = qj.at("mode").get<std::string>();
      for (const auto& uid : qj.at("excluded_uniprot_ids")) {
        q.excluded_uniprot_ids.insert(uid.get<std::string>());
      }
      for (const auto& entry : rj.at("kept")) {
        kept.emplace_back(entry.at("aid").get<long long>(),
                          entry.at("similarity").get<double>());
      }
    } catch (const ordered_json::exception& e) {
      throw Error("ArtifactFormatError",
                  retrieved_file.string() + ": " + e.what());
    }

    std::mt19937_64 rng(seed_of(ctx));
    std::vector<context::AssayContextBlock> blocks;
    int failed_summaries = 0;
    for (const auto& [aid, sim] : kept) {
      const bioassay::BioAssayRecord& record = store.lookup(aid);
      context::AssaySummary summary = context::summarize_assay(
          record, q, gateway, c.summarizer, c.template_dir);
      if (summary.failed) ++failed_summaries;
      std::optional<context::AssayContextBlock> block =
          context::make_block(record, summary, sim, c.hp, rng);
      if (block) blocks.push_back(std::move(*block));
    }
    context::GenerationPrompt prompt = context::build_prompt(
        q.description, blocks, "generation", c.template_dir);
    generation::GenerationRun run = generation::run_generation(
        prompt, c.hp, gateway, c.generator, seed_of(ctx), t.id);
    generation::save_run(run, prompt, c.hp,
                         (target_dir(dirs, ctx, t) / "run").string());

    total_unique += run.unique_canonical.size();
    ordered_json entry;
    entry["id"] = t.id;
    entry["batches"] = run.batches.size();
    entry["unique_generated"] = run.unique_generated;
    entry["unique_parsable"] = run.unique_canonical.size();
    entry["validity"] = run.validity;
    entry["aborted"] = run.aborted;
    entry["abort_kind"] = run.abort_kind;
    entry["digest"] = generation::run_digest(run);
    entry["source_blocks"] = prompt.source_blocks;
    entry["dropped_blocks"] = prompt.dropped_blocks;
    entry["failed_summaries"] = failed_summaries;
    manifest_targets.push_back(std::move(entry));
    single_summary = "generate: " +
                     std::to_string(run.unique_canonical.size()) +
                     " unique molecules, " +
                     std::to_string(run.batches.size()) +
                     " batches, validity " + format_number(run.validity);
    if (run.aborted) {
      abort_kind = run.abort_kind;
      abort_message = "generation for " + t.id + " aborted after " +
                      std::to_string(run.batches.size()) +
                      " batches; partial artifacts kept";
      break;
    }
  }

  ordered_json m = manifest_base(ctx, "generate");
  m["targets"] = std::move(manifest_targets);
  write_json(dirs.cmd / "manifest.json", m);
  if (!abort_kind.empty()) throw Error(abort_kind, abort_message);
  if (ctx.targets.empty()) return single_summary;
  return "generate: " + std::to_string(targets.size()) + " targets, " +
         std::to_string(total_unique) + " unique molecules";
}

std::string cmd_optimize(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.counter_query) {
    throw ConfigError("counter_query", "required by optimize");
  }
  CommandDirs dirs = prepare_dirs(ctx, "optimize");
  bioassay::Store store = open_store(c);
  embedding::VectorIndex index = open_index(c);
  llm::Gateway gateway(seed_of(ctx), fresh_call_log(dirs));

  retrieval::QuerySpec counter = prepared_query(*c.counter_query, gateway, c);
  embedding::EmbeddingVector query_vector =
      gateway.embed_text(counter.retrieval_text(), c.embedder);
  std::vector<embedding::RetrievalHit> hits =
      index.top_k(query_vector, static_cast<std::size_t>(c.hp.retrieval_k));
  std::vector<bioassay::BioAssayRecord> kept =
      retrieval::filter_assays(hits, store, counter, c.hp);
  std::map<long long, double> similarity;
  for (const auto& hit : hits) similarity.emplace(hit.aid, hit.similarity);
  std::mt19937_64 rng(fnv1a64("optimize", seed_of(ctx)));
  std::vector<context::AssayContextBlock> counter_blocks =
      build_blocks(kept, similarity, counter, gateway, c, rng);

  std::vector<TargetSpec> targets = effective_targets(ctx);
  ordered_json manifest_targets = ordered_json::array();
  std::size_t total_pairs = 0;
  std::string single_summary;
  for (const TargetSpec& t : targets) {
    fs::path molecules_file =
        stage_dir(dirs, ctx, "generate", t) / "run" / "molecules.txt";
    if (!fs::exists(molecules_file)) throw MissingArtifact("generate");
    std::vector<std::string> lines = read_lines(molecules_file);
    if (lines.size() > 10) lines.resize(10);
    std::vector<chem::Molecule> molecules;
    for (const auto& smiles : lines) {
      molecules.push_back(chem::parse_smiles(smiles));
    }
    std::vector<generation::OptimizedPair> pairs =
        generation::optimize_against_countertarget(
            molecules, counter.description, counter_blocks, gateway,
            c.generator, c.template_dir);

    std::string csv = "ORIGINAL,OPTIMIZED,FELL_BACK\n";
    int fallbacks = 0;
    for (const auto& pair : pairs) {
      if (pair.fell_back) ++fallbacks;
      csv += pair.original.canonical_smiles + "," +
             pair.optimized.canonical_smiles + "," +
             (pair.fell_back ? "1" : "0") + "\n";
    }
    write_file(target_dir(dirs, ctx, t) / "pairs.csv", csv);
    total_pairs += pairs.size();
    ordered_json entry;
    entry["id"] = t.id;
    entry["pairs"] = pairs.size();
    entry["fallbacks"] = fallbacks;
    ordered_json block_aids = ordered_json::array();
    for (const auto& block : counter_blocks) {
      block_aids.push_back(block.summary.aid);
    }
    entry["counter_blocks"] = std::move(block_aids);
    manifest_targets.push_back(std::move(entry));
    single_summary = "optimize: " + std::to_string(pairs.size()) + " pairs, " +
                     std::to_string(fallbacks) + " fallbacks";
  }

  ordered_json m = manifest_base(ctx, "optimize");
  m["targets"] = std::move(manifest_targets);
  write_json(dirs.cmd / "manifest.json", m);
  if (ctx.targets.empty()) return single_summary;
  return "optimize: " + std::to_string(targets.size()) + " targets, " +
         std::to_string(total_pairs) + " pairs";
}

std::string cmd_evaluate(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  CommandDirs dirs = prepare_dirs(ctx, "evaluate");

  std::vector<double> baseline;
  if (!c.eval.baseline_file.empty()) {
    for (const auto& record : eval::import_scores(c.eval.baseline_file)) {
      if (record.score_kind == eval::ScoreKind::kVinaDock) {
        baseline.push_back(record.value);
      }
    }
  }

  std::vector<TargetSpec> targets = effective_targets(ctx);
  std::vector<eval::EvalReport> reports(targets.size());
  std::mutex dock_mutex;
  auto evaluate_target = [&](std::size_t i) {
    const TargetSpec& t = targets[i];
    fs::path generate_dir = stage_dir(dirs, ctx, "generate", t) / "run";
    if (!fs::exists(generate_dir / "molecules.txt")) {
      throw MissingArtifact("generate");
    }
    std::vector<std::string> molecules =
        read_lines(generate_dir / "molecules.txt");
    fs::path retrieved_file =
        stage_dir(dirs, ctx, "retrieve", t) / "retrieved.json";
    if (!fs::exists(retrieved_file)) throw MissingArtifact("retrieve");
    double validity = 0.0;
    retrieval::RelevanceGroup group = retrieval::RelevanceGroup::kNo;
    try {
      validity =
          load_json(generate_dir / "manifest.json").at("validity").get<double>();
      group = group_from_label(load_json(retrieved_file)
                                   .at("group")
                                   .at("label")
                                   .get<std::string>());
    } catch (const ordered_json::exception& e) {
      throw Error("ArtifactFormatError", std::string("run manifests: ") +
                                             e.what());
    }

    std::string scores_file =
        t.scores_file.empty() ? c.eval.scores_file : t.scores_file;
    if (scores_file.empty() && c.eval.tool.executable.empty()) {
      throw ConfigError("eval.scores_file",
                        "configure a score file or an external tool");
    }
    std::vector<eval::ScoreRecord> scores;
    if (!c.eval.tool.executable.empty()) {
      // The adapter stages temp files keyed by receptor and pid; serialize
      // invocations so parallel targets cannot collide.
      std::lock_guard<std::mutex> lock(dock_mutex);
      eval::DockResult docked =
          eval::dock_adapter(molecules, c.eval.receptor, c.eval.tool);
      scores = std::move(docked.records);
    }
    if (!scores_file.empty()) {
      for (auto& record : eval::import_scores(scores_file)) {
        scores.push_back(std::move(record));
      }
    }
    std::optional<double> reference =
        t.reference_score ? t.reference_score : c.eval.reference_score;
    reports[i] = eval::build_report(t.id, molecules, validity, scores,
                                    reference, baseline, group);
  };

  std::vector<std::exception_ptr> errors(targets.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= targets.size()) return;
      try {
        evaluate_target(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int workers = std::min<int>(ctx.parallel,
                              static_cast<int>(targets.size()));
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(drain);
    for (auto& worker : pool) worker.join();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  write_file(dirs.cmd / "report.csv", eval::report_csv(reports));
  eval::AggregateReport aggregate = eval::aggregate_targets(reports);
  write_file(dirs.cmd / "summary.txt", eval::aggregate_summary(aggregate));

  ordered_json m = manifest_base(ctx, "evaluate");
  ordered_json manifest_targets = ordered_json::array();
  for (const auto& report : reports) {
    manifest_targets.push_back({{"id", report.target_id},
                                {"molecules", report.molecule_count},
                                {"scored", report.scored},
                                {"missing_scores", report.missing_scores}});
  }
  m["targets"] = std::move(manifest_targets);
  auto metric_json = [](const eval::MetricSummary& metric) {
    return ordered_json{
        {"avg", metric.avg}, {"med", metric.med}, {"targets", metric.targets}};
  };
  ordered_json aggregate_json;
  aggregate_json["vina"] = metric_json(aggregate.vina);
  aggregate_json["high_affinity"] = metric_json(aggregate.high_affinity);
  aggregate_json["diversity"] = metric_json(aggregate.diversity);
  aggregate_json["size"] = metric_json(aggregate.size);
  aggregate_json["validity"] = metric_json(aggregate.validity);
  aggregate_json["improvement"] = metric_json(aggregate.improvement);
  m["aggregate"] = std::move(aggregate_json);
  write_json(dirs.cmd / "manifest.json", m);

  std::string summary = "evaluate: " + std::to_string(targets.size()) +
                        (targets.size() == 1 ? " target" : " targets");
  if (aggregate.vina.targets > 0) {
    summary += ", vina avg " + format_number(aggregate.vina.avg);
  } else {
    summary += ", no docking scores";
  }
  return summary;
}

int exit_code_for(const Error& error) {
  static const std::set<std::string> kProviderKinds = {
      "ProviderError", "AuthError",  "RateLimited",      "Timeout",
      "ToolNotFound",  "ToolCrash",  "UnparseableOutput"};
  return kProviderKinds.count(error.kind()) ? 2 : 1;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"retrieval-augmented molecule generation pipeline"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  long long seed_flag = 0;
  app.add_option("--config", config_path, "run configuration (JSON)")
      ->required();
  CLI::Option* seed_option =
      app.add_option("--seed", seed_flag, "override the config seed");
  app.add_flag("--mock-llm", overrides.mock_llm,
               "force every provider to the deterministic mock");
  app.add_option("--targets", overrides.targets_file,
                 "batch mode: one query record per line (JSONL)");
  app.add_option("--parallel", overrides.parallel,
                 "worker threads for batch evaluation");

  app.add_subcommand("ingest", "build the assay store from raw documents");
  app.add_subcommand("index", "embed every stored assay into the vector index");
  app.add_subcommand("retrieve",
                     "rank assays for the query and assess relevance");
  app.add_subcommand("generate",
                     "build the context prompt and sample molecule batches");
  app.add_subcommand("optimize",
                     "rewrite top molecules against the counter-target");
  app.add_subcommand("evaluate",
                     "score generated molecules and aggregate metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (seed_option->count() > 0) overrides.seed = seed_flag;

  std::string command = app.get_subcommands().front()->get_name();
  try {
    RunContext ctx = make_context(load_config(config_path), overrides);
    std::string summary;
    if (command == "ingest") {
      summary = cmd_ingest(ctx);
    } else if (command == "index") {
      summary = cmd_index(ctx);
    } else if (command == "retrieve") {
      summary = cmd_retrieve(ctx);
    } else if (command == "generate") {
      summary = cmd_generate(ctx);
    } else if (command == "optimize") {
      summary = cmd_optimize(ctx);
    } else {
      summary = cmd_evaluate(ctx);
    }
    std::printf("%s\n", summary.c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace assaygen::cli
