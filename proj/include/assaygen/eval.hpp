#pragma once

// Per-target evaluation metrics and cross-target aggregation: docking/score
// adapters (external executable or imported score files), high-affinity
// fraction, baseline improvement, diversity/size summaries, hERG deltas,
// and the context-similarity analysis.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "assaygen/bioassay.hpp"
#include "assaygen/chem.hpp"
#include "assaygen/retrieval.hpp"

namespace assaygen::eval {

enum class ScoreKind { kVinaDock, kQed, kSa, kHerg };
enum class ScoreSource { kExternalTool, kImportedFile };

std::string score_kind_name(ScoreKind kind);  // vina_dock, qed, sa, herg
ScoreKind parse_score_kind(const std::string& name);  // UnparseableOutput

struct ScoreRecord {
  std::string canonical_smiles;  // raw text kept when it does not parse
  ScoreKind score_kind = ScoreKind::kVinaDock;
  double value = 0.0;
  ScoreSource source = ScoreSource::kImportedFile;
};

// Score file / tool output format, shared by both adapter modes:
//   SMILES,KIND,VALUE
// with one row per molecule-metric. KIND is a score_kind_name; qed, sa, and
// herg values must lie in [0,1]. Malformed rows throw UnparseableOutput
// with the 1-based line number.
std::vector<ScoreRecord> import_scores(const std::string& path);

struct ToolConfig {
  std::string executable;
  std::vector<std::string> extra_args;
};

struct DockResult {
  std::vector<ScoreRecord> records;
  std::vector<std::string> missing;  // molecules the tool did not score
};

// External tool contract: `<executable> <smiles_file> <receptor> [extra...]`
// where <smiles_file> holds one SMILES per line; the tool writes the score
// file format above to stdout. A missing executable throws ToolNotFound, a
// non-zero exit throws ToolCrash with a stderr excerpt, malformed output
// throws UnparseableOutput. Molecules absent from the output are reported
// in `missing`, never given placeholder scores.
DockResult dock_adapter(const std::vector<std::string>& molecules,
                        const std::string& receptor_ref,
                        const ToolConfig& tool);

// Fraction of scores strictly below the reference (lower docking score =
// better; ties are not counted). Throws Empty.
double high_affinity_fraction(const std::vector<double>& scores,
                              double reference_score);

// mean(baseline) - score: more negative docking than the baseline mean
// yields positive improvement. Throws EmptyBaseline.
double improvement_over_baseline(double score,
                                 const std::vector<double>& baseline_scores);

double mean_of(const std::vector<double>& values);    // throws Empty
double median_of(std::vector<double> values);         // even count: midpoint

// First record per (kind, smiles) wins; later duplicates are ignored.
std::map<std::string, double> score_lookup(
    const std::vector<ScoreRecord>& records, ScoreKind kind);

struct EvalReport {
  std::string target_id;
  std::size_t molecule_count = 0;  // unique valid molecules
  std::size_t scored = 0;          // with a vina_dock score
  std::size_t missing_scores = 0;  // without one (excluded from averages)
  double vina_avg = 0.0;           // meaningful when scored > 0
  double vina_med = 0.0;
  double high_affinity = 0.0;      // meaningful when has_reference
  bool has_reference = false;
  double diversity = 0.0;          // 0 below two molecules
  double size_avg = 0.0;
  double size_med = 0.0;
  double validity = 0.0;
  double improvement_avg = 0.0;    // meaningful when has_improvement
  double improvement_med = 0.0;
  bool has_improvement = false;    // baseline given and any molecule scored
  retrieval::RelevanceGroup relevance_group = retrieval::RelevanceGroup::kNo;
};

// Computes one target's report from its unique canonical molecules, the
// run validity, the score records, an optional reference score, and the
// baseline score list (may be empty: improvement is then skipped).
// Improvement is per-molecule first, then averaged per target.
EvalReport build_report(const std::string& target_id,
                        const std::vector<std::string>& molecules,
                        double validity,
                        const std::vector<ScoreRecord>& scores,
                        std::optional<double> reference_score,
                        const std::vector<double>& baseline_scores,
                        retrieval::RelevanceGroup relevance_group);

struct MetricSummary {
  double avg = 0.0;
  double med = 0.0;
  std::size_t targets = 0;  // reports contributing to this metric
};

struct AggregateReport {
  std::size_t targets = 0;
  MetricSummary vina;          // over per-target vina_avg
  MetricSummary high_affinity;
  MetricSummary diversity;
  MetricSummary size;
  MetricSummary validity;
  MetricSummary improvement;   // over per-target improvement_avg
};

// Per-target means first, then cross-target mean and median (even count:
// midpoint). Reports lacking a metric (no scored molecules, no reference,
// no baseline) are skipped for that metric, with the contributing count
// recorded. Throws Empty on an empty report list.
AggregateReport aggregate_targets(const std::vector<EvalReport>& reports);

struct SimilarityAnalysis {
  std::size_t high_scoring_context = 0;
  std::vector<double> pairs;       // all cross-pair Tanimoto values
  std::vector<std::size_t> histogram;  // 20 bins of width 0.05; 1.0 in last
};

// High-scoring context set = context molecules whose vina score is strictly
// below the reference. Returns every cross pair against the generated
// molecules. Throws NoHighScoringContext when no context molecule beats
// the reference.
SimilarityAnalysis context_similarity_analysis(
    const std::vector<chem::Molecule>& generated,
    const std::vector<bioassay::ActivityRow>& context_rows,
    const std::vector<ScoreRecord>& context_scores, double reference_score);

struct HergDelta {
  std::string original;
  std::string optimized;
  double before = 0.0;
  double after = 0.0;
};

struct HergDeltaResult {
  std::vector<HergDelta> deltas;
  std::size_t skipped = 0;  // pairs lacking a score on either side
};

// Before/after hERG scores per (original, optimized) molecule pair.
HergDeltaResult herg_deltas(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<ScoreRecord>& scores);

// Delimiter-separated per-target table, one row per report.
std::string report_csv(const std::vector<EvalReport>& reports);

// Structured-text summary of an aggregate, including the per-molecule
// improvement-averaging note.
std::string aggregate_summary(const AggregateReport& aggregate);

}  // namespace assaygen::eval
