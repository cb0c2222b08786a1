#pragma once

// Bioassay record model, ingestion from JSON documents or delimited activity
// tables, and a build-then-freeze on-disk store.

#include <optional>
#include <string>
#include <vector>

namespace assaygen::bioassay {

enum class Outcome { kActive, kInactive, kUnspecified };

enum class MeasureKind { kIC50, kKi, kKd, kPercentInhibition, kOther };

struct Measure {
  MeasureKind kind = MeasureKind::kOther;
  std::string kind_label;  // original label; meaningful for kOther
  char relation = '=';     // one of '<', '=', '>'
  double value = 0.0;
  std::string unit;
};

struct ActivityRow {
  std::string smiles;
  Outcome outcome = Outcome::kUnspecified;
  std::optional<Measure> measure;
};

struct TargetRef {
  std::string uniprot_id;
  std::string gene_symbol;
  std::string organism;
};

struct BioAssayRecord {
  long long aid = 0;
  std::string title;
  std::string description;
  std::string protocol;
  std::string comment;
  std::vector<TargetRef> targets;
  std::vector<ActivityRow> rows;
};

// Case-insensitive label mapping per the documented decision table:
// active -> Active, probe -> Active, inactive -> Inactive,
// unspecified -> Unspecified, inconclusive -> Unspecified.
// Throws UnknownOutcome otherwise.
Outcome map_outcome(const std::string& label);

std::string outcome_name(Outcome outcome);
std::string measure_kind_name(const Measure& measure);

// "<kind> <relation> <value> <unit>", e.g. "IC50 = 2100 nM".
std::string measure_text(const Measure& measure);

// Parses one JSON assay document. Throws MissingAid, MissingDescription, or
// MalformedRow.
BioAssayRecord ingest_assay(const std::string& json_text);

// Parses a delimited activity table with header SMILES,OUTCOME,KIND,RELATION,
// VALUE,UNIT and attaches the rows to the record.
std::vector<ActivityRow> parse_activity_table(const std::string& csv_text);

// JSON serialization used for persistence; ingest(serialize(r)) == r.
std::string serialize_record(const BioAssayRecord& record);

class Store {
 public:
  // Adds a record during the build phase. Duplicate aid throws MalformedRow.
  void add(BioAssayRecord record);

  const BioAssayRecord& lookup(long long aid) const;  // throws NotFound
  bool contains(long long aid) const;
  std::vector<long long> aids() const;  // ascending
  std::size_t size() const { return records_.size(); }

  // Writes one JSONL file per assay plus manifest.json into dir.
  void save(const std::string& dir) const;
  static Store load(const std::string& dir);

 private:
  std::vector<BioAssayRecord> records_;
  std::vector<long long> order_;  // aids sorted ascending, parallel to index
};

}  // namespace assaygen::bioassay
