#pragma once

// Batched molecule generation: [BOS]/[EOS] output parsing, per-batch
// bookkeeping, canonical deduplication with the validity metric, and the
// counter-target optimization loop.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/context.hpp"
#include "assaygen/llm.hpp"
#include "assaygen/retrieval.hpp"

namespace assaygen::generation {

struct ParsedEntry {
  int ordinal = 0;  // 1..10
  std::string smiles;
};

struct ParseFailure {
  int ordinal = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<ParsedEntry> entries;  // at most 10
  std::vector<ParseFailure> failures;
};

// Scans for [BOS]...[EOS] spans in order. Each span takes the line number
// 1..10 nearest before it when one is written, else the next sequential
// ordinal; content is whitespace-trimmed. A span interrupted by another
// [BOS] or by end of text yields a failure record instead of an entry, and
// scanning resumes at the inner marker. Total over arbitrary text.
ParseResult parse_generation(const std::string& raw);

struct GenerationBatch {
  int batch_index = 0;
  std::string raw_text;
  std::vector<ParsedEntry> parsed;
  std::vector<chem::Molecule> valid_molecules;  // parsed entries that parse
  std::vector<ParseFailure> parse_failures;
};

// parse_generation plus chem validation of every entry.
GenerationBatch make_batch(int batch_index, const std::string& raw_text);

struct GenerationRun {
  std::string target_id;
  std::uint64_t seed = 0;
  std::vector<GenerationBatch> batches;
  std::set<std::string> unique_canonical;
  // Unique generated strings: canonical form when parsable, trimmed text
  // otherwise (dedup before metrics).
  std::size_t unique_generated = 0;
  double validity = 0.0;  // |unique_canonical| / unique_generated
  bool aborted = false;
  std::string abort_kind;
};

// Recomputes unique_canonical, unique_generated, and validity from the
// batches already on the run.
void finalize_run(GenerationRun& run);

// Issues ceil(total_molecules / batch_size) chat calls with the identical
// prompt text, distinguishing batches only through the request sample index
// (seed * 2^16 + batch). A provider failure after retries aborts the run:
// the partial batches are kept, metrics cover them, and abort_kind records
// the error instead of throwing.
GenerationRun run_generation(const context::GenerationPrompt& prompt,
                             const retrieval::Hyperparameters& hp,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config,
                             std::uint64_t seed,
                             const std::string& target_id = "");

struct OptimizedPair {
  chem::Molecule original;
  chem::Molecule optimized;
  bool fell_back = false;  // optimized output unusable, original kept
};

// Renders the optimization template with the counter-target description,
// counter-assay blocks, and the ten input molecules, then pairs the reply
// by ordinal. A missing or unparsable ordinal falls back to the original
// molecule with the flag set. Requires exactly ten inputs
// (BatchSizeMismatch); gateway errors propagate.
std::vector<OptimizedPair> optimize_against_countertarget(
    const std::vector<chem::Molecule>& molecules,
    const std::string& counter_description,
    const std::vector<context::AssayContextBlock>& counter_blocks,
    llm::Gateway& gateway, const llm::ProviderConfig& config,
    const std::string& template_dir);

// Stable content digest over batches, molecule set, and metrics.
std::string run_digest(const GenerationRun& run);

// Writes prompt.txt, batch_<i>.txt, molecules.txt (one canonical SMILES per
// line), and manifest.json into dir. Reruns of an identical run are
// byte-identical.
void save_run(const GenerationRun& run, const context::GenerationPrompt& prompt,
              const retrieval::Hyperparameters& hp, const std::string& dir);

}  // namespace assaygen::generation
