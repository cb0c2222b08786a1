#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/eval.hpp"
#include "assaygen/util.hpp"

#include <sys/wait.h>
#include <unistd.h>

namespace assaygen::eval {

namespace {

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

std::string canonical_or_raw(const std::string& smiles) {
  try {
    return chem::parse_smiles(smiles).canonical_smiles;
  } catch (const Error&) {
    return smiles;
  }
}

std::vector<ScoreRecord> parse_score_text(const std::string& text,
                                          ScoreSource source) {
  std::vector<ScoreRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "SMILES,KIND,VALUE") {
        throw UnparseableOutput("line " + std::to_string(line_no) +
                                ": expected header SMILES,KIND,VALUE");
      }
      header_seen = true;
      continue;
    }
    auto first = row.find(',');
    auto second = first == std::string::npos
                      ? std::string::npos
                      : row.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        row.find(',', second + 1) != std::string::npos) {
      throw UnparseableOutput("line " + std::to_string(line_no) +
                              ": expected 3 comma-separated fields");
    }
    ScoreRecord record;
    record.source = source;
    record.canonical_smiles = canonical_or_raw(trim(row.substr(0, first)));
    std::string kind = trim(row.substr(first + 1, second - first - 1));
    try {
      record.score_kind = parse_score_kind(kind);
    } catch (const UnparseableOutput&) {
      throw UnparseableOutput("line " + std::to_string(line_no) +
                              ": unknown kind '" + kind + "'");
    }
    std::string value_text = trim(row.substr(second + 1));
    std::size_t consumed = 0;
    try {
      record.value = std::stod(value_text, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == 0 || consumed != value_text.size()) {
      throw UnparseableOutput("line " + std::to_string(line_no) +
                              ": bad value '" + value_text + "'");
    }
    if (record.score_kind != ScoreKind::kVinaDock &&
        (record.value < 0.0 || record.value > 1.0)) {
      throw UnparseableOutput("line " + std::to_string(line_no) + ": " +
                              kind + " value out of [0,1]");
    }
    records.push_back(std::move(record));
  }
  if (!header_seen) {
    throw UnparseableOutput("line 1: expected header SMILES,KIND,VALUE");
  }
  return records;
}

}  // namespace

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kVinaDock:
      return "vina_dock";
    case ScoreKind::kQed:
      return "qed";
    case ScoreKind::kSa:
      return "sa";
    case ScoreKind::kHerg:
      return "herg";
  }
  return "vina_dock";
}

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "vina_dock") return ScoreKind::kVinaDock;
  if (name == "qed") return ScoreKind::kQed;
  if (name == "sa") return ScoreKind::kSa;
  if (name == "herg") return ScoreKind::kHerg;
  throw UnparseableOutput("unknown kind '" + name + "'");
}

std::vector<ScoreRecord> import_scores(const std::string& path) {
  return parse_score_text(read_file(path), ScoreSource::kImportedFile);
}

DockResult dock_adapter(const std::vector<std::string>& molecules,
                        const std::string& receptor_ref,
                        const ToolConfig& tool) {
  namespace fs = std::filesystem;
  if (tool.executable.empty() || !fs::exists(tool.executable)) {
    throw ToolNotFound(tool.executable);
  }

  fs::path base = fs::temp_directory_path() /
                  ("assaygen_dock_" + to_hex(fnv1a64(receptor_ref)) + "_" +
                   std::to_string(::getpid()));
  fs::path mol_path = base.string() + ".smi";
  fs::path out_path = base.string() + ".out";
  fs::path err_path = base.string() + ".err";
  std::string mol_text;
  for (const auto& smiles : molecules) {
    mol_text += smiles;
    mol_text += "\n";
  }
  write_file(mol_path, mol_text);

  std::string command = shell_quote(tool.executable) + " " +
                        shell_quote(mol_path.string()) + " " +
                        shell_quote(receptor_ref);
  for (const auto& arg : tool.extra_args) command += " " + shell_quote(arg);
  command += " > " + shell_quote(out_path.string()) + " 2> " +
             shell_quote(err_path.string());

  int status = std::system(command.c_str());
  std::string err_text;
  try {
    err_text = read_file(err_path);
  } catch (const Error&) {
  }
  std::string out_text;
  try {
    out_text = read_file(out_path);
  } catch (const Error&) {
  }
  fs::remove(mol_path);
  fs::remove(out_path);
  fs::remove(err_path);

  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ToolCrash(err_text.substr(0, 200));
  }

  DockResult result;
  result.records = parse_score_text(out_text, ScoreSource::kExternalTool);
  auto scored = score_lookup(result.records, ScoreKind::kVinaDock);
  for (const auto& smiles : molecules) {
    if (scored.find(canonical_or_raw(smiles)) == scored.end()) {
      result.missing.push_back(smiles);
    }
  }
  return result;
}

double high_affinity_fraction(const std::vector<double>& scores,
                              double reference_score) {
  if (scores.empty()) throw Empty("no scores");
  std::size_t better = 0;
  for (double score : scores) better += score < reference_score;
  return static_cast<double>(better) / static_cast<double>(scores.size());
}

double improvement_over_baseline(double score,
                                 const std::vector<double>& baseline_scores) {
  if (baseline_scores.empty()) throw EmptyBaseline("no baseline scores");
  return mean_of(baseline_scores) - score;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw Empty("no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw Empty("no values");
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

std::map<std::string, double> score_lookup(
    const std::vector<ScoreRecord>& records, ScoreKind kind) {
  std::map<std::string, double> lookup;
  for (const auto& record : records) {
    if (record.score_kind != kind) continue;
    lookup.emplace(record.canonical_smiles, record.value);
  }
  return lookup;
}

EvalReport build_report(const std::string& target_id,
                        const std::vector<std::string>& molecules,
                        double validity,
                        const std::vector<ScoreRecord>& scores,
                        std::optional<double> reference_score,
                        const std::vector<double>& baseline_scores,
                        retrieval::RelevanceGroup relevance_group) {
  EvalReport report;
  report.target_id = target_id;
  report.validity = validity;
  report.relevance_group = relevance_group;

  std::vector<chem::Molecule> parsed;
  for (const auto& smiles : molecules) {
    parsed.push_back(chem::parse_smiles(smiles));
  }
  report.molecule_count = parsed.size();

  auto vina = score_lookup(scores, ScoreKind::kVinaDock);
  std::vector<double> values;
  std::vector<double> sizes;
  for (const auto& mol : parsed) {
    sizes.push_back(static_cast<double>(mol.heavy_atom_count));
    auto hit = vina.find(mol.canonical_smiles);
    if (hit == vina.end()) {
      report.missing_scores += 1;
    } else {
      values.push_back(hit->second);
    }
  }
  report.scored = values.size();

  if (!values.empty()) {
    report.vina_avg = mean_of(values);
    report.vina_med = median_of(values);
    if (reference_score) {
      report.high_affinity = high_affinity_fraction(values, *reference_score);
      report.has_reference = true;
    }
    if (!baseline_scores.empty()) {
      std::vector<double> improvements;
      improvements.reserve(values.size());
      for (double v : values) {
        improvements.push_back(improvement_over_baseline(v, baseline_scores));
      }
      report.improvement_avg = mean_of(improvements);
      report.improvement_med = median_of(improvements);
      report.has_improvement = true;
    }
  }
  if (!sizes.empty()) {
    report.size_avg = mean_of(sizes);
    report.size_med = median_of(sizes);
  }
  if (parsed.size() >= 2) report.diversity = chem::diversity(parsed);
  return report;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary summary;
  summary.targets = values.size();
  if (!values.empty()) {
    summary.avg = mean_of(values);
    summary.med = median_of(values);
  }
  return summary;
}

}  // namespace

AggregateReport aggregate_targets(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Empty("no reports");
  AggregateReport aggregate;
  aggregate.targets = reports.size();

  std::vector<double> vina, affinity, diversity, size, validity, improvement;
  for (const auto& report : reports) {
    diversity.push_back(report.diversity);
    size.push_back(report.size_avg);
    validity.push_back(report.validity);
    if (report.scored > 0) vina.push_back(report.vina_avg);
    if (report.has_reference) affinity.push_back(report.high_affinity);
    if (report.has_improvement) improvement.push_back(report.improvement_avg);
  }
  aggregate.vina = summarize(vina);
  aggregate.high_affinity = summarize(affinity);
  aggregate.diversity = summarize(diversity);
  aggregate.size = summarize(size);
  aggregate.validity = summarize(validity);
  aggregate.improvement = summarize(improvement);
  return aggregate;
}

SimilarityAnalysis context_similarity_analysis(
    const std::vector<chem::Molecule>& generated,
    const std::vector<bioassay::ActivityRow>& context_rows,
    const std::vector<ScoreRecord>& context_scores, double reference_score) {
  auto vina = score_lookup(context_scores, ScoreKind::kVinaDock);

  std::vector<chem::Fingerprint> high_prints;
  for (const auto& row : context_rows) {
    try {
      auto mol = chem::parse_smiles(row.smiles);
      auto hit = vina.find(mol.canonical_smiles);
      if (hit != vina.end() && hit->second < reference_score) {
        high_prints.push_back(chem::morgan_fingerprint(mol));
      }
    } catch (const Error&) {
    }
  }
  if (high_prints.empty()) {
    throw NoHighScoringContext(
        "no context molecule scores below the reference");
  }

  SimilarityAnalysis analysis;
  analysis.high_scoring_context = high_prints.size();
  analysis.histogram.assign(20, 0);
  for (const auto& mol : generated) {
    auto print = chem::morgan_fingerprint(mol);
    for (const auto& context_print : high_prints) {
      double similarity = chem::tanimoto(print, context_print);
      analysis.pairs.push_back(similarity);
      auto bin = static_cast<std::size_t>(similarity / 0.05);
      analysis.histogram[std::min<std::size_t>(bin, 19)] += 1;
    }
  }
  return analysis;
}

HergDeltaResult herg_deltas(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<ScoreRecord>& scores) {
  auto herg = score_lookup(scores, ScoreKind::kHerg);
  HergDeltaResult result;
  for (const auto& [original, optimized] : pairs) {
    auto before = herg.find(canonical_or_raw(original));
    auto after = herg.find(canonical_or_raw(optimized));
    if (before == herg.end() || after == herg.end()) {
      result.skipped += 1;
      continue;
    }
    result.deltas.push_back(
        {original, optimized, before->second, after->second});
  }
  return result;
}

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::string out =
      "target_id,molecules,scored,missing,vina_avg,vina_med,high_affinity,"
      "diversity,size_avg,size_med,validity,improvement_avg,improvement_med,"
      "relevance_group\n";
  for (const auto& report : reports) {
    out += report.target_id;
    out += "," + std::to_string(report.molecule_count);
    out += "," + std::to_string(report.scored);
    out += "," + std::to_string(report.missing_scores);
    out += "," + (report.scored > 0 ? format_number(report.vina_avg) : "");
    out += "," + (report.scored > 0 ? format_number(report.vina_med) : "");
    out += "," +
           (report.has_reference ? format_number(report.high_affinity) : "");
    out += "," + format_number(report.diversity);
    out += "," + format_number(report.size_avg);
    out += "," + format_number(report.size_med);
    out += "," + format_number(report.validity);
    out += "," + (report.has_improvement
                      ? format_number(report.improvement_avg)
                      : "");
    out += "," + (report.has_improvement
                      ? format_number(report.improvement_med)
                      : "");
    out += "," + retrieval::group_name(report.relevance_group);
    out += "\n";
  }
  return out;
}

std::string aggregate_summary(const AggregateReport& aggregate) {
  nlohmann::ordered_json summary;
  summary["targets"] = aggregate.targets;
  auto metric = [](const MetricSummary& m) {
    nlohmann::ordered_json entry;
    entry["mean"] = m.avg;
    entry["median"] = m.med;
    entry["targets"] = m.targets;
    return entry;
  };
  summary["metrics"]["vina_avg"] = metric(aggregate.vina);
  summary["metrics"]["high_affinity"] = metric(aggregate.high_affinity);
  summary["metrics"]["diversity"] = metric(aggregate.diversity);
  summary["metrics"]["size_avg"] = metric(aggregate.size);
  summary["metrics"]["validity"] = metric(aggregate.validity);
  summary["metrics"]["improvement_avg"] = metric(aggregate.improvement);
  summary["improvement_basis"] = "per-molecule";
  return summary.dump(2);
}

}  // namespace assaygen::eval
