#pragma once

// Layered context assembly: per-assay summaries, class-balanced molecule
// sampling, activity tables, and the final generation/optimization prompt.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "assaygen/bioassay.hpp"
#include "assaygen/llm.hpp"
#include "assaygen/retrieval.hpp"

namespace assaygen::context {

struct AssaySummary {
  long long aid = 0;
  std::string summary;
  std::string assay_type;
  std::string observations;
  bool counterscreen = false;
  bool failed = false;          // gateway or extraction failure
  std::string failure_kind;
};

struct AssayContextBlock {
  AssaySummary summary;
  double similarity = 0.0;  // retrieval similarity, used for budget drops
  std::vector<std::string> table_lines;
  std::vector<bioassay::ActivityRow> sampled;
};

struct GenerationPrompt {
  std::string template_id;  // "generation" or "optimization"
  std::string rendered_text;
  std::vector<long long> source_blocks;
  std::vector<long long> dropped_blocks;  // over-budget, least similar first
};

// Fills the summarization template with the query description and the
// record payload, then parses the four required keys. Failures are recorded
// on the returned summary, never thrown.
AssaySummary summarize_assay(const bioassay::BioAssayRecord& record,
                             const retrieval::QuerySpec& query,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config,
                             const std::string& template_dir);

// Rows that parse and fit the heavy-atom bound. Applied before any class
// counting or sampling.
std::vector<bioassay::ActivityRow> filter_rows(
    const std::vector<bioassay::ActivityRow>& rows, int max_mol_size);

// Class-balanced sample: all actives (capped at n_mol at random when more),
// plus up to n_mol random inactive/unspecified rows; with no actives at
// all, every row, capped at 2*n_mol at random. Without replacement, actives
// first, original row order inside each part. Throws EmptyRows.
std::vector<bioassay::ActivityRow> sample_molecules(
    const std::vector<bioassay::ActivityRow>& rows,
    const retrieval::Hyperparameters& hp, std::mt19937_64& rng);

// One line per row: "<smiles> <Outcome>" plus the measure text when present,
// e.g. "CCO Active IC50 = 2100 nM".
std::vector<std::string> render_table(
    const std::vector<bioassay::ActivityRow>& sampled);

// Filter + gate + sample + render for one assay. Returns nothing when the
// assay has no usable rows, or no actives and fewer than 2*n_mol rows (the
// lack-of-actives gate).
std::optional<AssayContextBlock> make_block(
    const bioassay::BioAssayRecord& record, const AssaySummary& summary,
    double similarity, const retrieval::Hyperparameters& hp,
    std::mt19937_64& rng);

// Renders the selected template with the assay blocks. Failed summaries are
// skipped; generation mode requires at least one usable block
// (NoUsableBlocks). Blocks are dropped least-similar-first until the
// rendered text fits the character budget (the last block always stays).
// input_smiles is required by optimization mode only.
GenerationPrompt build_prompt(const std::string& query_description,
                              const std::vector<AssayContextBlock>& blocks,
                              const std::string& template_id,
                              const std::string& template_dir,
                              const std::vector<std::string>& input_smiles = {},
                              std::size_t budget_chars = 100000);

}  // namespace assaygen::context
