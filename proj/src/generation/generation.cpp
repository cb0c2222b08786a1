#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/generation.hpp"
#include "assaygen/templates.hpp"
#include "assaygen/util.hpp"

namespace assaygen::generation {

namespace {

constexpr std::string_view kBos = "[BOS]";
constexpr std::string_view kEos = "[EOS]";
constexpr std::size_t kBatchCapacity = 10;

// First "N." / "N)" / "N:" with N in 1..10 inside the line prefix before
// the span, e.g. "3. [BOS]" or "**7.** [BOS]".
int line_number(const std::string& raw, std::size_t span_pos) {
  std::size_t line_start = raw.rfind('\n', span_pos == 0 ? 0 : span_pos - 1);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  int found = 0;
  std::size_t i = line_start;
  while (i < span_pos) {
    if (std::isdigit(static_cast<unsigned char>(raw[i]))) {
      std::size_t end = i;
      while (end < span_pos &&
             std::isdigit(static_cast<unsigned char>(raw[end]))) {
        ++end;
      }
      if (end < span_pos && end - i <= 2 &&
          (raw[end] == '.' || raw[end] == ')' || raw[end] == ':')) {
        int value = 0;
        for (std::size_t d = i; d < end; ++d) {
          value = value * 10 + (raw[d] - '0');
        }
        if (value >= 1 && value <= 10) found = value;
      }
      i = end;
    } else {
      ++i;
    }
  }
  return found;
}

}  // namespace

ParseResult parse_generation(const std::string& raw) {
  ParseResult result;
  int next_sequential = 1;
  std::size_t pos = raw.find(kBos);
  while (pos != std::string::npos) {
    std::size_t content = pos + kBos.size();
    std::size_t eos = raw.find(kEos, content);
    std::size_t inner = raw.find(kBos, content);

    int written = line_number(raw, pos);
    int ordinal = written != 0 ? written : next_sequential;

    if (eos == std::string::npos || (inner != std::string::npos && inner < eos)) {
      // Unterminated span: it ends at the inner [BOS] or at end of text and
      // contributes no entry.
      result.failures.push_back(
          {ordinal, inner != std::string::npos && (eos == std::string::npos ||
                                                   inner < eos)
                        ? "unterminated span (nested [BOS])"
                        : "unterminated span (end of text)"});
      next_sequential = ordinal + 1;
      pos = inner;
      continue;
    }

    if (result.entries.size() == kBatchCapacity) {
      result.failures.push_back({ordinal, "excess span beyond batch size"});
    } else if (ordinal > 10) {
      result.failures.push_back({ordinal, "ordinal beyond 10"});
    } else {
      result.entries.push_back(
          {ordinal, trim(raw.substr(content, eos - content))});
    }
    next_sequential = ordinal + 1;
    pos = raw.find(kBos, eos + kEos.size());
  }
  return result;
}

GenerationBatch make_batch(int batch_index, const std::string& raw_text) {
  GenerationBatch batch;
  batch.batch_index = batch_index;
  batch.raw_text = raw_text;
  auto parsed = parse_generation(raw_text);
  batch.parsed = std::move(parsed.entries);
  batch.parse_failures = std::move(parsed.failures);
  for (const auto& entry : batch.parsed) {
    try {
      batch.valid_molecules.push_back(chem::parse_smiles(entry.smiles));
    } catch (const Error&) {
    }
  }
  return batch;
}

void finalize_run(GenerationRun& run) {
  run.unique_canonical.clear();
  std::set<std::string> unparsable;
  for (const auto& batch : run.batches) {
    for (const auto& entry : batch.parsed) {
      try {
        run.unique_canonical.insert(
            chem::parse_smiles(entry.smiles).canonical_smiles);
      } catch (const Error&) {
        unparsable.insert(entry.smiles);
      }
    }
  }
  run.unique_generated = run.unique_canonical.size() + unparsable.size();
  run.validity =
      run.unique_generated == 0
          ? 0.0
          : static_cast<double>(run.unique_canonical.size()) /
                static_cast<double>(run.unique_generated);
}

GenerationRun run_generation(const context::GenerationPrompt& prompt,
                             const retrieval::Hyperparameters& hp,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config,
                             std::uint64_t seed,
                             const std::string& target_id) {
  hp.validate();
  GenerationRun run;
  run.target_id = target_id;
  run.seed = seed;

  int calls = (hp.total_molecules + hp.batch_size - 1) / hp.batch_size;
  for (int i = 0; i < calls; ++i) {
    llm::ChatRequest request;
    request.prompt = prompt.rendered_text;
    request.sample_index =
        (seed << 16) + static_cast<std::uint64_t>(i);
    try {
      run.batches.push_back(make_batch(i, gateway.chat(request, config)));
    } catch (const Error& e) {
      run.aborted = true;
      run.abort_kind = e.kind();
      break;
    }
  }
  finalize_run(run);
  return run;
}

std::vector<OptimizedPair> optimize_against_countertarget(
    const std::vector<chem::Molecule>& molecules,
    const std::string& counter_description,
    const std::vector<context::AssayContextBlock>& counter_blocks,
    llm::Gateway& gateway, const llm::ProviderConfig& config,
    const std::string& template_dir) {
  if (molecules.size() != 10) {
    throw BatchSizeMismatch("expected 10 molecules, got " +
                            std::to_string(molecules.size()));
  }
  std::vector<std::string> inputs;
  inputs.reserve(molecules.size());
  for (const auto& mol : molecules) inputs.push_back(mol.canonical_smiles);

  auto prompt = context::build_prompt(counter_description, counter_blocks,
                                      "optimization", template_dir, inputs);
  llm::ChatRequest request;
  request.prompt = prompt.rendered_text;
  auto parsed = parse_generation(gateway.chat(request, config));

  std::vector<std::string> by_ordinal(11);
  std::vector<bool> seen(11, false);
  for (const auto& entry : parsed.entries) {
    if (entry.ordinal >= 1 && entry.ordinal <= 10 && !seen[
            static_cast<std::size_t>(entry.ordinal)]) {
      seen[static_cast<std::size_t>(entry.ordinal)] = true;
      by_ordinal[static_cast<std::size_t>(entry.ordinal)] = entry.smiles;
    }
  }

  std::vector<OptimizedPair> pairs;
  pairs.reserve(molecules.size());
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    OptimizedPair pair;
    pair.original = molecules[i];
    if (seen[i + 1]) {
      try {
        pair.optimized = chem::parse_smiles(by_ordinal[i + 1]);
        pairs.push_back(std::move(pair));
        continue;
      } catch (const Error&) {
      }
    }
    pair.optimized = molecules[i];
    pair.fell_back = true;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::string run_digest(const GenerationRun& run) {
  std::uint64_t h = fnv1a64(run.target_id);
  h = fnv1a64(std::to_string(run.seed), h);
  for (const auto& batch : run.batches) {
    h = fnv1a64(batch.raw_text, h);
    for (const auto& entry : batch.parsed) {
      h = fnv1a64(std::to_string(entry.ordinal), h);
      h = fnv1a64(entry.smiles, h);
    }
  }
  for (const auto& smiles : run.unique_canonical) h = fnv1a64(smiles, h);
  h = fnv1a64(std::to_string(run.unique_generated), h);
  h = fnv1a64(format_number(run.validity), h);
  h = fnv1a64(run.aborted ? run.abort_kind : "", h);
  return to_hex(h);
}

void save_run(const GenerationRun& run, const context::GenerationPrompt& prompt,
              const retrieval::Hyperparameters& hp, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_file(fs::path(dir) / "prompt.txt", prompt.rendered_text);
  for (const auto& batch : run.batches) {
    write_file(fs::path(dir) /
                   ("batch_" + std::to_string(batch.batch_index) + ".txt"),
               batch.raw_text);
  }
  std::string molecules;
  for (const auto& smiles : run.unique_canonical) {
    molecules += smiles;
    molecules += "\n";
  }
  write_file(fs::path(dir) / "molecules.txt", molecules);

  nlohmann::ordered_json manifest;
  manifest["target_id"] = run.target_id;
  manifest["seed"] = run.seed;
  manifest["template_id"] = prompt.template_id;
  manifest["source_blocks"] = prompt.source_blocks;
  manifest["dropped_blocks"] = prompt.dropped_blocks;
  manifest["batches"] = run.batches.size();
  manifest["batch_size"] = hp.batch_size;
  manifest["total_molecules"] = hp.total_molecules;
  manifest["unique_generated"] = run.unique_generated;
  manifest["unique_parsable"] = run.unique_canonical.size();
  manifest["validity"] = run.validity;
  manifest["dedup_policy"] = "canonical-dedup-then-metrics";
  manifest["aborted"] = run.aborted;
  manifest["abort_kind"] = run.abort_kind;
  manifest["digest"] = run_digest(run);
  write_file(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace assaygen::generation
