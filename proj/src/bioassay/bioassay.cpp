#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "assaygen/bioassay.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/util.hpp"
#include "json.hpp"

namespace assaygen::bioassay {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_value(double value) {
  // Integral magnitudes print without a decimal point: "2100", not "2100.0".
  if (value == static_cast<long long>(value) && std::abs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

MeasureKind kind_from_label(const std::string& label) {
  std::string lower = to_lower(label);
  lower.erase(std::remove_if(lower.begin(), lower.end(),
                             [](char c) { return c == ' ' || c == '_'; }),
              lower.end());
  if (lower == "ic50") return MeasureKind::kIC50;
  if (lower == "ki") return MeasureKind::kKi;
  if (lower == "kd") return MeasureKind::kKd;
  if (lower == "percentinhibition") return MeasureKind::kPercentInhibition;
  return MeasureKind::kOther;
}

std::optional<double> parse_finite(const ordered_json& value) {
  double out = 0.0;
  if (value.is_number()) {
    out = value.get<double>();
  } else if (value.is_string()) {
    const std::string& text = value.get_ref<const std::string&>();
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || (end != nullptr && *end != '\0')) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<Measure> build_measure(const std::string& kind_label,
                                     const std::string& relation,
                                     const ordered_json& value,
                                     const std::string& unit) {
  if (kind_label.empty()) return std::nullopt;
  if (relation.size() != 1 || (relation != "<" && relation != "=" &&
                               relation != ">")) {
    return std::nullopt;
  }
  std::optional<double> parsed = parse_finite(value);
  if (!parsed) return std::nullopt;
  Measure measure;
  measure.kind = kind_from_label(kind_label);
  measure.kind_label = kind_label;
  measure.relation = relation[0];
  measure.value = *parsed;
  measure.unit = unit;
  return measure;
}

ActivityRow row_from_json(const ordered_json& row_json, std::size_t index) {
  if (!row_json.is_object()) throw MalformedRow(index, "row is not an object");
  ActivityRow row;
  if (!row_json.contains("smiles") || !row_json["smiles"].is_string() ||
      row_json["smiles"].get_ref<const std::string&>().empty()) {
    throw MalformedRow(index, "missing smiles");
  }
  row.smiles = row_json["smiles"].get<std::string>();
  if (!row_json.contains("outcome") || !row_json["outcome"].is_string()) {
    throw MalformedRow(index, "missing outcome");
  }
  try {
    row.outcome = map_outcome(row_json["outcome"].get<std::string>());
  } catch (const UnknownOutcome& e) {
    throw MalformedRow(index, e.what());
  }
  std::string kind_label;
  if (row_json.contains("activity_kind") &&
      row_json["activity_kind"].is_string()) {
    kind_label = row_json["activity_kind"].get<std::string>();
  }
  std::string relation = "=";
  if (row_json.contains("relation") && row_json["relation"].is_string()) {
    relation = row_json["relation"].get<std::string>();
  }
  std::string unit;
  if (row_json.contains("unit") && row_json["unit"].is_string()) {
    unit = row_json["unit"].get<std::string>();
  }
  ordered_json value;
  if (row_json.contains("value")) value = row_json["value"];
  row.measure = build_measure(kind_label, relation, value, unit);
  return row;
}

ordered_json row_to_json(const ActivityRow& row) {
  ordered_json out;
  out["smiles"] = row.smiles;
  out["outcome"] = outcome_name(row.outcome);
  if (row.measure) {
    out["activity_kind"] = measure_kind_name(*row.measure);
    out["relation"] = std::string(1, row.measure->relation);
    out["value"] = row.measure->value;
    out["unit"] = row.measure->unit;
  }
  return out;
}

ordered_json header_to_json(const BioAssayRecord& record) {
  ordered_json out;
  out["aid"] = record.aid;
  out["title"] = record.title;
  out["description"] = record.description;
  out["protocol"] = record.protocol;
  out["comment"] = record.comment;
  ordered_json targets = ordered_json::array();
  for (const TargetRef& target : record.targets) {
    ordered_json t;
    if (!target.uniprot_id.empty()) t["uniprot_id"] = target.uniprot_id;
    if (!target.gene_symbol.empty()) t["gene_symbol"] = target.gene_symbol;
    if (!target.organism.empty()) t["organism"] = target.organism;
    targets.push_back(std::move(t));
  }
  out["targets"] = std::move(targets);
  return out;
}

BioAssayRecord record_from_json(const ordered_json& doc) {
  if (!doc.is_object()) throw MalformedRow(0, "document is not an object");
  BioAssayRecord record;
  if (!doc.contains("aid") || !doc["aid"].is_number_integer() ||
      doc["aid"].get<long long>() <= 0) {
    throw MissingAid("aid must be a positive integer");
  }
  record.aid = doc["aid"].get<long long>();
  if (!doc.contains("description") || !doc["description"].is_string() ||
      doc["description"].get_ref<const std::string&>().empty()) {
    throw MissingDescription("description must be a non-empty string");
  }
  record.description = doc["description"].get<std::string>();
  for (const char* key : {"title", "protocol", "comment"}) {
    if (doc.contains(key) && doc[key].is_string()) {
      std::string value = doc[key].get<std::string>();
      if (std::string(key) == "title") record.title = value;
      if (std::string(key) == "protocol") record.protocol = value;
      if (std::string(key) == "comment") record.comment = value;
    }
  }
  if (doc.contains("targets") && doc["targets"].is_array()) {
    for (std::size_t i = 0; i < doc["targets"].size(); ++i) {
      const ordered_json& t = doc["targets"][i];
      TargetRef target;
      if (t.contains("uniprot_id") && t["uniprot_id"].is_string()) {
        target.uniprot_id = t["uniprot_id"].get<std::string>();
      }
      if (t.contains("gene_symbol") && t["gene_symbol"].is_string()) {
        target.gene_symbol = t["gene_symbol"].get<std::string>();
      }
      if (t.contains("organism") && t["organism"].is_string()) {
        target.organism = t["organism"].get<std::string>();
      }
      if (target.uniprot_id.empty() && target.gene_symbol.empty() &&
          target.organism.empty()) {
        throw MalformedRow(i, "target needs at least one field");
      }
      record.targets.push_back(std::move(target));
    }
  }
  if (doc.contains("rows") && doc["rows"].is_array()) {
    for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
      record.rows.push_back(row_from_json(doc["rows"][i], i));
    }
  }
  return record;
}

}  // namespace

Outcome map_outcome(const std::string& label) {
  std::string lower = to_lower(trim(label));
  if (lower == "active" || lower == "probe") return Outcome::kActive;
  if (lower == "inactive") return Outcome::kInactive;
  if (lower == "unspecified" || lower == "inconclusive") {
    return Outcome::kUnspecified;
  }
  throw UnknownOutcome("label '" + label + "'");
}

std::string outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kActive:
      return "Active";
    case Outcome::kInactive:
      return "Inactive";
    case Outcome::kUnspecified:
      return "Unspecified";
  }
  return "Unspecified";
}

std::string measure_kind_name(const Measure& measure) {
  switch (measure.kind) {
    case MeasureKind::kIC50:
      return "IC50";
    case MeasureKind::kKi:
      return "Ki";
    case MeasureKind::kKd:
      return "Kd";
    case MeasureKind::kPercentInhibition:
      return "PercentInhibition";
    case MeasureKind::kOther:
      return measure.kind_label;
  }
  return measure.kind_label;
}

std::string measure_text(const Measure& measure) {
  std::string out = measure_kind_name(measure);
  out += ' ';
  out += measure.relation;
  out += ' ';
  out += format_value(measure.value);
  if (!measure.unit.empty()) {
    out += ' ';
    out += measure.unit;
  }
  return out;
}

BioAssayRecord ingest_assay(const std::string& json_text) {
  ordered_json doc = ordered_json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw MalformedRow(0, "document is not valid JSON");
  return record_from_json(doc);
}

std::vector<ActivityRow> parse_activity_table(const std::string& csv_text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : csv_text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  if (!current.empty()) lines.push_back(current);
  if (lines.empty()) throw MalformedRow(0, "empty table");

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    return fields;
  };

  if (to_lower(trim(lines[0])) != "smiles,outcome,kind,relation,value,unit") {
    throw MalformedRow(0, "expected header SMILES,OUTCOME,KIND,RELATION,VALUE,UNIT");
  }
  std::vector<ActivityRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<std::string> fields = split(lines[i]);
    if (fields.size() != 6) {
      throw MalformedRow(i, "expected 6 fields, got " +
                                std::to_string(fields.size()));
    }
    ActivityRow row;
    row.smiles = trim(fields[0]);
    if (row.smiles.empty()) throw MalformedRow(i, "missing smiles");
    try {
      row.outcome = map_outcome(fields[1]);
    } catch (const UnknownOutcome& e) {
      throw MalformedRow(i, e.what());
    }
    row.measure = build_measure(trim(fields[2]), trim(fields[3]),
                                ordered_json(trim(fields[4])),
                                trim(fields[5]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string serialize_record(const BioAssayRecord& record) {
  ordered_json doc = header_to_json(record);
  ordered_json rows = ordered_json::array();
  for (const ActivityRow& row : record.rows) rows.push_back(row_to_json(row));
  doc["rows"] = std::move(rows);
  return doc.dump();
}

void Store::add(BioAssayRecord record) {
  if (contains(record.aid)) {
    throw Error("DuplicateAid", "aid " + std::to_string(record.aid) +
                                    " already in store");
  }
  order_.push_back(record.aid);
  records_.push_back(std::move(record));
}

bool Store::contains(long long aid) const {
  return std::find(order_.begin(), order_.end(), aid) != order_.end();
}

const BioAssayRecord& Store::lookup(long long aid) const {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (order_[i] == aid) return records_[i];
  }
  throw NotFound("aid " + std::to_string(aid));
}

std::vector<long long> Store::aids() const {
  std::vector<long long> out = order_;
  std::sort(out.begin(), out.end());
  return out;
}

void Store::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["version"] = 1;
  manifest["count"] = records_.size();
  ordered_json files = ordered_json::array();
  for (long long aid : aids()) {
    const BioAssayRecord& record = lookup(aid);
    std::string name = "assay_" + std::to_string(aid) + ".jsonl";
    std::string body = header_to_json(record).dump();
    body += '\n';
    for (const ActivityRow& row : record.rows) {
      body += row_to_json(row).dump();
      body += '\n';
    }
    write_file((fs::path(dir) / name).string(), body);
    ordered_json entry;
    entry["aid"] = aid;
    entry["file"] = name;
    files.push_back(std::move(entry));
  }
  manifest["files"] = std::move(files);
  write_file((fs::path(dir) / "manifest.json").string(),
             manifest.dump(2) + "\n");
}

Store Store::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::string manifest_text =
      read_file((fs::path(dir) / "manifest.json").string());
  ordered_json manifest = ordered_json::parse(manifest_text, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("files")) {
    throw Error("StoreFormatError", "manifest.json is not readable");
  }
  Store store;
  for (const ordered_json& entry : manifest["files"]) {
    std::string text =
        read_file((fs::path(dir) / entry["file"].get<std::string>()).string());
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(current);
        current.clear();
      } else {
        current += c;
      }
    }
    if (!current.empty()) lines.push_back(current);
    if (lines.empty()) {
      throw Error("StoreFormatError",
                  entry["file"].get<std::string>() + " is empty");
    }
    ordered_json header = ordered_json::parse(lines[0], nullptr, false);
    if (header.is_discarded()) {
      throw Error("StoreFormatError",
                  entry["file"].get<std::string>() + " header unreadable");
    }
    ordered_json doc = header;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      ordered_json row = ordered_json::parse(lines[i], nullptr, false);
      if (row.is_discarded()) {
        throw Error("StoreFormatError", entry["file"].get<std::string>() +
                                            " row " + std::to_string(i) +
                                            " unreadable");
      }
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    store.add(record_from_json(doc));
  }
  return store;
}

}  // namespace assaygen::bioassay
