#include "tablerl/dataset.hpp"

#include <cctype>
#include <fstream>

namespace tablerl {

using nlohmann::json;

json to_json(const TaskInstance& instance) {
  json table;
  table["title"] =
      instance.table.title ? json(*instance.table.title) : json(nullptr);
  if (instance.table.is_grid()) {
    table["grid"] = instance.table.grid().rows;
  } else {
    const auto& pre = instance.table.pre_rendered();
    table["pre_rendered"] = pre.text;
    table["format"] = to_string(pre.format);
  }

  json gold;
  if (const auto* list = std::get_if<ShortList>(&instance.gold)) {
    gold = list->items;
  } else if (const auto* label = std::get_if<Label>(&instance.gold)) {
    gold = to_string(label->value);
  } else {
    gold = json{{"sentence", std::get<Sentence>(instance.gold).text}};
  }

  return json{{"id", instance.id},
              {"task", to_string(instance.task)},
              {"table", std::move(table)},
              {"query", instance.query},
              {"gold", std::move(gold)},
              {"metadata", instance.metadata}};
}

namespace {

[[noreturn]] void schema_fail(const std::string& field, const std::string& what) {
  throw SchemaError(0, field, what);
}

const json& require(const json& doc, const char* field) {
  if (!doc.contains(field)) schema_fail(field, "missing");
  return doc.at(field);
}

std::string require_string(const json& doc, const char* field) {
  const json& v = require(doc, field);
  if (!v.is_string()) schema_fail(field, "expected a string");
  return v.get<std::string>();
}

Table parse_table(const json& doc) {
  if (!doc.is_object()) schema_fail("table", "expected an object");
  Table table;
  if (doc.contains("title") && !doc.at("title").is_null()) {
    if (!doc.at("title").is_string()) schema_fail("table.title", "expected string or null");
    table.title = doc.at("title").get<std::string>();
  }
  const bool has_grid = doc.contains("grid");
  const bool has_pre = doc.contains("pre_rendered");
  if (has_grid == has_pre) {
    schema_fail("table", "exactly one of 'grid' or 'pre_rendered' is required");
  }
  if (has_grid) {
    const json& grid = doc.at("grid");
    if (!grid.is_array()) schema_fail("table.grid", "expected an array of rows");
    GridTable g;
    for (const auto& row : grid) {
      if (!row.is_array()) schema_fail("table.grid", "expected rows of strings");
      std::vector<std::string> cells;
      for (const auto& cell : row) {
        if (!cell.is_string()) schema_fail("table.grid", "cells must be strings");
        cells.push_back(cell.get<std::string>());
      }
      g.rows.push_back(std::move(cells));
    }
    table.content = std::move(g);
  } else {
    PreRenderedTable pre;
    pre.text = require_string(doc, "pre_rendered");
    const std::string format = require_string(doc, "format");
    try {
      pre.format = table_format_from_string(format);
    } catch (const Error& e) {
      schema_fail("table.format", e.what());
    }
    table.content = std::move(pre);
  }
  try {
    validate(table);
  } catch (const Error& e) {
    schema_fail("table", e.what());
  }
  return table;
}

GoldAnswer parse_gold(const json& doc) {
  if (doc.is_array()) {
    ShortList list;
    for (const auto& item : doc) {
      if (!item.is_string()) schema_fail("gold", "list entries must be strings");
      list.items.push_back(item.get<std::string>());
    }
    return list;
  }
  if (doc.is_string()) {
    const std::string label = doc.get<std::string>();
    if (label == "entailed") return Label{TfvLabel::entailed};
    if (label == "refuted") return Label{TfvLabel::refuted};
    schema_fail("gold", "label must be 'entailed' or 'refuted', got '" + label + "'");
  }
  if (doc.is_object() && doc.contains("sentence") &&
      doc.at("sentence").is_string()) {
    return Sentence{doc.at("sentence").get<std::string>()};
  }
  schema_fail("gold", "expected a string list, a label, or {\"sentence\": ...}");
}

}  // namespace

TaskInstance task_instance_from_json(const json& doc) {
  if (!doc.is_object()) schema_fail("", "record is not a JSON object");
  TaskInstance instance;
  instance.id = require_string(doc, "id");
  try {
    instance.task = task_kind_from_string(require_string(doc, "task"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    schema_fail("task", e.what());
  }
  instance.table = parse_table(require(doc, "table"));
  instance.query = require_string(doc, "query");
  instance.gold = parse_gold(require(doc, "gold"));
  if (doc.contains("metadata")) {
    const json& meta = doc.at("metadata");
    if (!meta.is_object()) schema_fail("metadata", "expected an object");
    for (const auto& [key, value] : meta.items()) {
      if (!value.is_string()) schema_fail("metadata", "values must be strings");
      instance.metadata[key] = value.get<std::string>();
    }
  }
  try {
    validate(instance);
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    schema_fail("gold", e.what());
  }
  return instance;
}

json to_json(const PredictionRecord& record) {
  return json{{"id", record.instance_id},
              {"model", record.model_tag},
              {"responses", record.responses}};
}

PredictionRecord prediction_record_from_json(const json& doc) {
  if (!doc.is_object()) schema_fail("", "record is not a JSON object");
  PredictionRecord record;
  record.instance_id = require_string(doc, "id");
  record.model_tag = doc.contains("model") ? require_string(doc, "model") : "";
  const json& responses = require(doc, "responses");
  if (!responses.is_array() || responses.empty()) {
    schema_fail("responses", "expected a non-empty array of strings");
  }
  for (const auto& r : responses) {
    if (!r.is_string()) schema_fail("responses", "entries must be strings");
    record.responses.push_back(r.get<std::string>());
  }
  return record;
}

namespace {

// Shared JSONL loop: parses each line and converts via `convert`, rewriting
// SchemaError with the 1-based line number.
template <typename T, typename Convert>
std::vector<T> ingest_jsonl(const std::string& path, bool strict,
                            std::vector<std::string>* errors, Convert convert) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<T> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    try {
      json doc = json::parse(line);
      out.push_back(convert(doc));
    } catch (const SchemaError& e) {
      SchemaError with_line(line_no, e.field(), e.message());
      if (strict) throw with_line;
      if (errors) errors->push_back(with_line.what());
    } catch (const json::exception& e) {
      SchemaError with_line(line_no, "", std::string("invalid JSON: ") + e.what());
      if (strict) throw with_line;
      if (errors) errors->push_back(with_line.what());
    }
  }
  return out;
}

}  // namespace

std::vector<TaskInstance> ingest_dataset(const std::string& path, bool strict,
                                         std::vector<std::string>* errors) {
  return ingest_jsonl<TaskInstance>(path, strict, errors,
                                    task_instance_from_json);
}

std::vector<PredictionRecord> ingest_predictions(
    const std::string& path, bool strict, std::vector<std::string>* errors) {
  return ingest_jsonl<PredictionRecord>(path, strict, errors,
                                        prediction_record_from_json);
}

}  // namespace tablerl
