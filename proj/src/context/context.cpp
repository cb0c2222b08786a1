#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/context.hpp"
#include "assaygen/embedding.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/templates.hpp"
#include "assaygen/util.hpp"

namespace assaygen::context {

namespace {

bool normalized_bool(const std::string& value) {
  return to_lower(trim(value)) == "true";
}

// k distinct entries from pool, returned in ascending order so the sample
// preserves original row order. Partial Fisher-Yates on a copy.
std::vector<std::size_t> sample_indices(std::vector<std::size_t> pool,
                                        std::size_t k,
                                        std::mt19937_64& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

constexpr const char* kTableIntro =
    "This is the activity data table. Each line has the SMILES, followed by "
    "activity type (active, inactive or unspecified) and the experimental "
    "value.";

constexpr const char* kAvoidNote =
    "This BioAssay is a counterscreen; its active molecules should be "
    "avoided.";

std::string render_block(const AssayContextBlock& block) {
  std::string out = block.summary.summary;
  if (block.summary.counterscreen) {
    out += "\n";
    out += kAvoidNote;
  }
  out += "\n\n";
  out += kTableIntro;
  out += "\n\n";
  for (const auto& line : block.table_lines) {
    out += line;
    out += "\n";
  }
  return out;
}

std::string render_prompt(const std::string& template_text,
                          const std::string& query_description,
                          const std::string& template_id,
                          const std::vector<const AssayContextBlock*>& blocks,
                          const std::vector<std::string>& input_smiles) {
  std::string content;
  for (const auto* block : blocks) {
    if (!content.empty()) content += "\n";
    content += render_block(*block);
  }
  if (template_id == "optimization") {
    std::string inputs;
    for (std::size_t i = 0; i < input_smiles.size(); ++i) {
      inputs += std::to_string(i + 1) + ". " + input_smiles[i] + "\n";
    }
    return templates::render(template_text,
                             {{"hERG description", query_description},
                              {"hERG BioAssays", content},
                              {"Input SMILES", inputs}});
  }
  return templates::render(template_text,
                           {{"Protein Description", query_description},
                            {"Assay Content", content}});
}

}  // namespace

AssaySummary summarize_assay(const bioassay::BioAssayRecord& record,
                             const retrieval::QuerySpec& query,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config,
                             const std::string& template_dir) {
  AssaySummary result;
  result.aid = record.aid;
  try {
    const std::string template_text =
        templates::load(template_dir, templates::Id::kSummarization);
    llm::ChatRequest request;
    request.prompt = templates::render(
        template_text,
        {{"Protein Description", query.description},
         {"BioAssay JSON", embedding::embedding_payload(record)}});
    std::string reply = gateway.chat(request, config);
    auto fields = llm::extract_structured(
        reply, {"BioAssay_Summary", "Assay_Type", "Summary_of_Observations",
                "CounterScreen"});
    result.summary = fields.at("BioAssay_Summary");
    result.assay_type = fields.at("Assay_Type");
    result.observations = fields.at("Summary_of_Observations");
    result.counterscreen = normalized_bool(fields.at("CounterScreen"));
  } catch (const Error& e) {
    result.failed = true;
    result.failure_kind = e.kind();
  }
  return result;
}

std::vector<bioassay::ActivityRow> filter_rows(
    const std::vector<bioassay::ActivityRow>& rows, int max_mol_size) {
  std::vector<bioassay::ActivityRow> kept;
  for (const auto& row : rows) {
    try {
      chem::Molecule mol = chem::parse_smiles(row.smiles);
      if (mol.heavy_atom_count <= max_mol_size) kept.push_back(row);
    } catch (const Error&) {
    }
  }
  return kept;
}

std::vector<bioassay::ActivityRow> sample_molecules(
    const std::vector<bioassay::ActivityRow>& rows,
    const retrieval::Hyperparameters& hp, std::mt19937_64& rng) {
  if (rows.empty()) throw EmptyRows("no rows to sample");
  const auto n_mol = static_cast<std::size_t>(hp.n_mol);

  std::vector<std::size_t> actives;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (rows[i].outcome == bioassay::Outcome::kActive ? actives : others)
        .push_back(i);
  }

  std::vector<std::size_t> chosen;
  if (actives.empty()) {
    if (rows.size() > 2 * n_mol) {
      chosen = sample_indices(std::move(others), 2 * n_mol, rng);
    } else {
      chosen = std::move(others);
    }
  } else {
    if (actives.size() > n_mol) {
      chosen = sample_indices(std::move(actives), n_mol, rng);
    } else {
      chosen = std::move(actives);
    }
    std::size_t take = std::min(n_mol, others.size());
    if (take > 0) {
      auto picked = sample_indices(std::move(others), take, rng);
      chosen.insert(chosen.end(), picked.begin(), picked.end());
    }
  }

  std::vector<bioassay::ActivityRow> sampled;
  sampled.reserve(chosen.size());
  for (std::size_t index : chosen) sampled.push_back(rows[index]);
  return sampled;
}

std::vector<std::string> render_table(
    const std::vector<bioassay::ActivityRow>& sampled) {
  std::vector<std::string> lines;
  lines.reserve(sampled.size());
  for (const auto& row : sampled) {
    std::string line = row.smiles + " " + bioassay::outcome_name(row.outcome);
    if (row.measure) line += " " + bioassay::measure_text(*row.measure);
    lines.push_back(std::move(line));
  }
  return lines;
}

std::optional<AssayContextBlock> make_block(
    const bioassay::BioAssayRecord& record, const AssaySummary& summary,
    double similarity, const retrieval::Hyperparameters& hp,
    std::mt19937_64& rng) {
  if (summary.failed) return std::nullopt;
  auto rows = filter_rows(record.rows, hp.max_mol_size);
  if (rows.empty()) return std::nullopt;

  // Lack-of-actives gate: an assay with nothing active must bring at least
  // 2*n_mol rows to be worth a block.
  bool has_active = std::any_of(
      rows.begin(), rows.end(), [](const bioassay::ActivityRow& row) {
        return row.outcome == bioassay::Outcome::kActive;
      });
  if (!has_active &&
      rows.size() < 2 * static_cast<std::size_t>(hp.n_mol)) {
    return std::nullopt;
  }

  AssayContextBlock block;
  block.summary = summary;
  block.similarity = similarity;
  block.sampled = sample_molecules(rows, hp, rng);
  block.table_lines = render_table(block.sampled);
  return block;
}

GenerationPrompt build_prompt(const std::string& query_description,
                              const std::vector<AssayContextBlock>& blocks,
                              const std::string& template_id,
                              const std::string& template_dir,
                              const std::vector<std::string>& input_smiles,
                              std::size_t budget_chars) {
  if (template_id != "generation" && template_id != "optimization") {
    throw ConfigError("template_id", "expected generation or optimization");
  }
  const std::string template_text = templates::load(
      template_dir, template_id == "generation"
                        ? templates::Id::kGeneration
                        : templates::Id::kOptimization);

  std::vector<const AssayContextBlock*> usable;
  for (const auto& block : blocks) {
    if (!block.summary.failed) usable.push_back(&block);
  }
  if (usable.empty() && template_id == "generation") {
    throw NoUsableBlocks("no assay block survived summarization");
  }

  GenerationPrompt prompt;
  prompt.template_id = template_id;
  prompt.rendered_text = render_prompt(template_text, query_description,
                                       template_id, usable, input_smiles);

  // Over budget: drop the least-similar block and re-render, keeping at
  // least one block so generation never loses its whole context.
  while (prompt.rendered_text.size() > budget_chars && usable.size() > 1) {
    auto victim = std::min_element(
        usable.begin(), usable.end(),
        [](const AssayContextBlock* a, const AssayContextBlock* b) {
          return a->similarity < b->similarity;
        });
    prompt.dropped_blocks.push_back((*victim)->summary.aid);
    usable.erase(victim);
    prompt.rendered_text = render_prompt(template_text, query_description,
                                         template_id, usable, input_smiles);
  }
  for (const auto* block : usable) {
    prompt.source_blocks.push_back(block->summary.aid);
  }
  return prompt;
}

}  // namespace assaygen::context
