#include <algorithm>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/retrieval.hpp"
#include "assaygen/templates.hpp"
#include "assaygen/util.hpp"

namespace assaygen::retrieval {

const std::string& QuerySpec::retrieval_text() const {
  return mode == "full-description" ? description : keywords;
}

void QuerySpec::validate() const {
  if (description.empty()) {
    throw ConfigError("description", "must be non-empty");
  }
  if (mode != "keywords" && mode != "full-description") {
    throw ConfigError("mode", "expected keywords or full-description");
  }
  if (mode == "keywords" && keywords.empty()) {
    throw ConfigError("keywords", "required in keywords mode");
  }
}

void Hyperparameters::validate() const {
  auto positive = [](int v, const char* field) {
    if (v <= 0) throw ConfigError(field, "must be positive");
  };
  positive(max_assay_num, "max_assay_num");
  positive(n_mol, "n_mol");
  positive(max_mol_size, "max_mol_size");
  positive(min_mol_num, "min_mol_num");
  positive(retrieval_k, "retrieval_k");
  positive(batch_size, "batch_size");
  positive(total_molecules, "total_molecules");
  if (batch_size > total_molecules) {
    throw ConfigError("batch_size", "must not exceed total_molecules");
  }
}

std::string group_name(RelevanceGroup group) {
  switch (group) {
    case RelevanceGroup::kHigh:
      return "High";
    case RelevanceGroup::kMedium:
      return "Medium";
    case RelevanceGroup::kLow:
      return "Low";
    case RelevanceGroup::kNo:
      return "No";
  }
  return "No";
}

RelevanceGroup group_for_fraction(double x) {
  if (x >= 0.7) return RelevanceGroup::kHigh;
  if (x > 0.4) return RelevanceGroup::kMedium;
  if (x > 0.1) return RelevanceGroup::kLow;
  return RelevanceGroup::kNo;
}

std::string extract_keywords(const std::string& description,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config) {
  if (description.empty()) {
    throw ConfigError("description", "must be non-empty");
  }
  llm::ChatRequest request;
  request.prompt =
      "Extract the protein/phenotype keywords from the following "
      "description as a comma-separated list.\n" +
      description;
  std::string reply = trim(gateway.chat(request, config));
  return reply.empty() ? description : reply;
}

std::vector<bioassay::BioAssayRecord> filter_assays(
    const std::vector<embedding::RetrievalHit>& hits,
    const bioassay::Store& store, const QuerySpec& query,
    const Hyperparameters& hp) {
  hp.validate();

  std::vector<const bioassay::BioAssayRecord*> stage;
  for (const auto& hit : hits) {
    if (!store.contains(hit.aid)) continue;
    const auto& record = store.lookup(hit.aid);
    bool excluded = false;
    for (const auto& target : record.targets) {
      if (!target.uniprot_id.empty() &&
          query.excluded_uniprot_ids.count(target.uniprot_id) > 0) {
        excluded = true;
        break;
      }
    }
    if (!excluded) stage.push_back(&record);
  }

  std::vector<bioassay::BioAssayRecord> kept;
  for (const auto* record : stage) {
    if (record->rows.size() <
        static_cast<std::size_t>(hp.min_mol_num)) {
      continue;
    }
    kept.push_back(*record);
    if (kept.size() == static_cast<std::size_t>(hp.max_assay_num)) break;
  }
  return kept;
}

RelevanceAssessment assess_relevance(
    const bioassay::BioAssayRecord& record, const QuerySpec& query,
    llm::Gateway& gateway, const std::vector<llm::ProviderConfig>& assessors,
    const std::string& template_dir) {
  if (record.description.empty()) {
    throw MissingDescription("assay " + std::to_string(record.aid));
  }
  const std::string template_text =
      templates::load(template_dir, templates::Id::kRelevance);
  const std::string prompt = templates::render(
      template_text, {{"protein description", query.description},
                      {"BioAssay content",
                       embedding::embedding_payload(record)}});

  RelevanceAssessment assessment;
  assessment.aid = record.aid;
  for (const auto& assessor : assessors) {
    llm::ChatRequest request;
    request.prompt = prompt;
    try {
      std::string reply = gateway.chat(request, assessor);
      std::string verdict =
          llm::extract_structured(reply, {"Relevant"}).at("Relevant");
      if (verdict == "True") {
        assessment.votes.push_back({assessor.model_id, true});
      } else if (verdict == "False") {
        assessment.votes.push_back({assessor.model_id, false});
      } else {
        assessment.abstentions.push_back(
            {assessor.model_id, "UnparseableVote: " + verdict});
      }
    } catch (const Error& e) {
      assessment.abstentions.push_back({assessor.model_id, e.kind()});
    }
  }
  return assessment;
}

namespace {

bool assay_relevant(const RelevanceAssessment& assessment,
                    bool ties_relevant) {
  int yes = 0;
  int no = 0;
  for (const auto& vote : assessment.votes) {
    (vote.relevant ? yes : no) += 1;
  }
  if (yes == no) return ties_relevant;
  return yes > no;
}

}  // namespace

GroupResult relevance_group(
    const std::vector<RelevanceAssessment>& assessments, bool ties_relevant) {
  GroupResult result;
  for (const auto& assessment : assessments) {
    if (assessment.votes.empty()) continue;
    result.assessed += 1;
    if (assay_relevant(assessment, ties_relevant)) result.relevant += 1;
  }
  result.x = result.assessed == 0
                 ? 0.0
                 : static_cast<double>(result.relevant) / result.assessed;
  result.group = group_for_fraction(result.x);
  return result;
}

std::string retrieval_report(
    const QuerySpec& query, const Hyperparameters& hp,
    const std::vector<embedding::RetrievalHit>& hits,
    const std::vector<bioassay::BioAssayRecord>& kept,
    const std::vector<RelevanceAssessment>& assessments,
    const GroupResult& group) {
  std::unordered_set<long long> kept_aids;
  for (const auto& record : kept) kept_aids.insert(record.aid);

  nlohmann::ordered_json report;
  report["query"]["description"] = query.description;
  report["query"]["keywords"] = query.keywords;
  report["query"]["mode"] = query.mode;
  report["query"]["excluded_uniprot_ids"] =
      std::vector<std::string>(query.excluded_uniprot_ids.begin(),
                               query.excluded_uniprot_ids.end());
  report["retrieval_k"] = hp.retrieval_k;
  report["max_assay_num"] = hp.max_assay_num;
  report["min_mol_num"] = hp.min_mol_num;

  report["hits"] = nlohmann::ordered_json::array();
  for (const auto& hit : hits) {
    nlohmann::ordered_json row;
    row["aid"] = hit.aid;
    row["similarity"] = hit.similarity;
    row["kept"] = kept_aids.count(hit.aid) > 0;
    report["hits"].push_back(row);
  }

  report["assessments"] = nlohmann::ordered_json::array();
  for (const auto& assessment : assessments) {
    nlohmann::ordered_json row;
    row["aid"] = assessment.aid;
    row["votes"] = nlohmann::ordered_json::array();
    for (const auto& vote : assessment.votes) {
      row["votes"].push_back({{"assessor", vote.assessor_model},
                              {"relevant", vote.relevant}});
    }
    row["abstentions"] = nlohmann::ordered_json::array();
    for (const auto& abstention : assessment.abstentions) {
      row["abstentions"].push_back({{"assessor", abstention.assessor_model},
                                    {"reason", abstention.reason}});
    }
    report["assessments"].push_back(row);
  }

  report["relevance"]["x"] = group.x;
  report["relevance"]["relevant"] = group.relevant;
  report["relevance"]["assessed"] = group.assessed;
  report["relevance"]["group"] = group_name(group.group);
  return report.dump(2);
}

}  // namespace assaygen::retrieval
