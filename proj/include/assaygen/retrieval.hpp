#pragma once

// Query handling: keyword extraction, hit filtering against the store, LLM
// relevance voting, and the four-level relevance grouping.

#include <set>
#include <string>
#include <vector>

#include "assaygen/bioassay.hpp"
#include "assaygen/embedding.hpp"
#include "assaygen/llm.hpp"

namespace assaygen::retrieval {

struct QuerySpec {
  std::string description;
  std::string keywords;  // LLM-extracted, comma-separated
  std::set<std::string> excluded_uniprot_ids;
  std::string mode = "keywords";  // or "full-description"

  // The text embedded for retrieval under the current mode.
  const std::string& retrieval_text() const;
  void validate() const;  // throws ConfigError
};

struct Hyperparameters {
  int max_assay_num = 10;
  int n_mol = 8;
  int max_mol_size = 45;
  int min_mol_num = 8;
  int retrieval_k = 300;
  int batch_size = 10;
  int total_molecules = 100;

  void validate() const;  // throws ConfigError
};

struct RelevanceVote {
  std::string assessor_model;
  bool relevant = false;
};

struct Abstention {
  std::string assessor_model;
  std::string reason;
};

struct RelevanceAssessment {
  long long aid = 0;
  std::vector<RelevanceVote> votes;
  std::vector<Abstention> abstentions;
};

enum class RelevanceGroup { kHigh, kMedium, kLow, kNo };

std::string group_name(RelevanceGroup group);

// Threshold mapping for x = relevant assays / assessed assays:
// x >= 0.7 High, x > 0.4 Medium, x > 0.1 Low, else No.
RelevanceGroup group_for_fraction(double x);

// Asks the gateway for a comma-separated keyword list; an empty reply falls
// back to the raw description. Gateway errors propagate.
std::string extract_keywords(const std::string& description,
                             llm::Gateway& gateway,
                             const llm::ProviderConfig& config);

// Applies, in order: excluded-UniProt drop (exact accession match on any
// target), minimum-row-count drop, truncation to max_assay_num. Similarity
// order of the hits is preserved. Hits whose aid is missing from the store
// are dropped with the exclusion filter.
std::vector<bioassay::BioAssayRecord> filter_assays(
    const std::vector<embedding::RetrievalHit>& hits,
    const bioassay::Store& store, const QuerySpec& query,
    const Hyperparameters& hp);

// One vote per assessor via the relevance template; assessor failures are
// recorded as abstentions, never thrown.
RelevanceAssessment assess_relevance(
    const bioassay::BioAssayRecord& record, const QuerySpec& query,
    llm::Gateway& gateway, const std::vector<llm::ProviderConfig>& assessors,
    const std::string& template_dir);

struct GroupResult {
  RelevanceGroup group = RelevanceGroup::kNo;
  double x = 0.0;        // relevant assays / assessed assays
  int relevant = 0;      // majority-relevant assay count
  int assessed = 0;      // assays with at least one vote
};

// Per-assay verdict is the vote majority; ties count as relevant when
// ties_relevant is set. Assessments with no votes at all are excluded from
// both counts; with nothing assessed, x = 0 and the group is No.
GroupResult relevance_group(
    const std::vector<RelevanceAssessment>& assessments,
    bool ties_relevant = true);

// Structured-text report: query, k, per-assay similarity and filter
// outcome, votes, and the group label.
std::string retrieval_report(
    const QuerySpec& query, const Hyperparameters& hp,
    const std::vector<embedding::RetrievalHit>& hits,
    const std::vector<bioassay::BioAssayRecord>& kept,
    const std::vector<RelevanceAssessment>& assessments,
    const GroupResult& group);

}  // namespace assaygen::retrieval
