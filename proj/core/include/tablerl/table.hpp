#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tablerl/errors.hpp"

namespace tablerl {

enum class TableFormat { markdown, html };

const char* to_string(TableFormat format);
TableFormat table_format_from_string(const std::string& s);

// Structured table: first row is the header, all rows share one column count.
struct GridTable {
  std::vector<std::vector<std::string>> rows;
  bool operator==(const GridTable&) const = default;
};

// Opaque table text (e.g. hierarchical headers) with its declared format.
struct PreRenderedTable {
  std::string text;
  TableFormat format = TableFormat::markdown;
  bool operator==(const PreRenderedTable&) const = default;
};

struct Table {
  std::optional<std::string> title;
  std::variant<GridTable, PreRenderedTable> content;

  bool is_grid() const { return std::holds_alternative<GridTable>(content); }
  const GridTable& grid() const { return std::get<GridTable>(content); }
  const PreRenderedTable& pre_rendered() const {
    return std::get<PreRenderedTable>(content);
  }
  bool operator==(const Table&) const = default;
};

enum class TaskKind { tqa, tfv, fftqa };

const char* to_string(TaskKind task);
TaskKind task_kind_from_string(const std::string& s);

enum class TfvLabel { entailed, refuted };

const char* to_string(TfvLabel label);

// Verifiable ground truth. The active alternative must match the task kind:
// ShortList for TQA, Label for TFV, Sentence for FF-TQA.
struct ShortList {
  std::vector<std::string> items;
  bool operator==(const ShortList&) const = default;
};

struct Label {
  TfvLabel value = TfvLabel::entailed;
  bool operator==(const Label&) const = default;
};

struct Sentence {
  std::string text;
  bool operator==(const Sentence&) const = default;
};

using GoldAnswer = std::variant<ShortList, Label, Sentence>;

struct TaskInstance {
  std::string id;
  TaskKind task = TaskKind::tqa;
  Table table;
  std::string query;  // question for TQA/FF-TQA, claim for TFV
  GoldAnswer gold;
  std::map<std::string, std::string> metadata;
};

// Throws InvalidTable on structural violations (ragged grid, empty grid,
// newline inside a grid cell).
void validate(const Table& table);

// Throws GoldTaskMismatch when the gold variant does not match the task,
// InvalidTable for table violations, Error for empty gold entries.
void validate(const TaskInstance& instance);

bool gold_matches_task(const GoldAnswer& gold, TaskKind task);

// Serializes a grid table to pipe-delimited markdown or minimal HTML;
// a pre_rendered table is returned verbatim when formats agree.
// Throws FormatMismatch when a pre_rendered tag differs from `format`.
std::string render_table(const Table& table, TableFormat format);

// Inverse of render_table(., markdown) on grid tables. Throws ParseError
// with line/column on ragged rows or a missing separator row.
Table parse_markdown_table(const std::string& text);

}  // namespace tablerl
