#include "tablerl/table.hpp"

#include <sstream>

namespace tablerl {

const char* to_string(TableFormat format) {
  switch (format) {
    case TableFormat::markdown:
      return "markdown";
    case TableFormat::html:
      return "html";
  }
  return "?";
}

TableFormat table_format_from_string(const std::string& s) {
  if (s == "markdown") return TableFormat::markdown;
  if (s == "html") return TableFormat::html;
  throw Error("unknown table format: '" + s + "'");
}

const char* to_string(TaskKind task) {
  switch (task) {
    case TaskKind::tqa:
      return "tqa";
    case TaskKind::tfv:
      return "tfv";
    case TaskKind::fftqa:
      return "fftqa";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "tqa") return TaskKind::tqa;
  if (s == "tfv") return TaskKind::tfv;
  if (s == "fftqa") return TaskKind::fftqa;
  throw Error("unknown task kind: '" + s + "'");
}

const char* to_string(TfvLabel label) {
  return label == TfvLabel::entailed ? "entailed" : "refuted";
}

void validate(const Table& table) {
  if (!table.is_grid()) return;
  const auto& rows = table.grid().rows;
  if (rows.empty()) throw InvalidTable("grid table has no rows");
  const size_t cols = rows.front().size();
  if (cols == 0) throw InvalidTable("grid table has zero columns");
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw InvalidTable("ragged grid: row " + std::to_string(r) + " has " +
                         std::to_string(rows[r].size()) + " cells, expected " +
                         std::to_string(cols));
    }
    for (const auto& cell : rows[r]) {
      if (cell.find('\n') != std::string::npos ||
          cell.find('\r') != std::string::npos) {
        throw InvalidTable("grid cell contains a newline");
      }
    }
  }
}

bool gold_matches_task(const GoldAnswer& gold, TaskKind task) {
  switch (task) {
    case TaskKind::tqa:
      return std::holds_alternative<ShortList>(gold);
    case TaskKind::tfv:
      return std::holds_alternative<Label>(gold);
    case TaskKind::fftqa:
      return std::holds_alternative<Sentence>(gold);
  }
  return false;
}

namespace {

bool is_blank(const std::string& s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

void validate(const TaskInstance& instance) {
  validate(instance.table);
  if (!gold_matches_task(instance.gold, instance.task)) {
    throw GoldTaskMismatch("gold answer variant does not match task '" +
                           std::string(to_string(instance.task)) + "' (id '" +
                           instance.id + "')");
  }
  if (const auto* list = std::get_if<ShortList>(&instance.gold)) {
    if (list->items.empty()) throw Error("gold short-answer list is empty");
    for (const auto& item : list->items) {
      if (is_blank(item)) throw Error("gold short-answer entry is blank");
    }
  } else if (const auto* sentence = std::get_if<Sentence>(&instance.gold)) {
    if (is_blank(sentence->text)) throw Error("gold sentence is empty");
  }
}

namespace {

// Markdown cells escape backslash and pipe so parse_markdown_table is an
// exact inverse.
std::string escape_md_cell(const std::string& cell) {
  std::string out;
  out.reserve(cell.size());
  for (char c : cell) {
    if (c == '\\' || c == '|') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string escape_html(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string render_grid_markdown(const GridTable& grid) {
  std::string out;
  const size_t cols = grid.rows.front().size();
  auto emit_row = [&out](const std::vector<std::string>& row) {
    out.push_back('|');
    for (const auto& cell : row) {
      out.push_back(' ');
      out += escape_md_cell(cell);
      out += " |";
    }
  };
  emit_row(grid.rows.front());
  out += "\n|";
  for (size_t c = 0; c < cols; ++c) out += " --- |";
  for (size_t r = 1; r < grid.rows.size(); ++r) {
    out.push_back('\n');
    emit_row(grid.rows[r]);
  }
  return out;
}

std::string render_grid_html(const GridTable& grid) {
  std::string out = "<table>";
  for (size_t r = 0; r < grid.rows.size(); ++r) {
    const char* tag = r == 0 ? "th" : "td";
    out += "<tr>";
    for (const auto& cell : grid.rows[r]) {
      out += "<";
      out += tag;
      out += ">";
      out += escape_html(cell);
      out += "</";
      out += tag;
      out += ">";
    }
    out += "</tr>";
  }
  out += "</table>";
  return out;
}

}  // namespace

std::string render_table(const Table& table, TableFormat format) {
  validate(table);
  if (!table.is_grid()) {
    const auto& pre = table.pre_rendered();
    if (pre.format != format) {
      throw FormatMismatch(std::string("pre-rendered table is tagged '") +
                           to_string(pre.format) + "' but '" +
                           to_string(format) + "' was requested");
    }
    return pre.text;
  }
  return format == TableFormat::markdown ? render_grid_markdown(table.grid())
                                         : render_grid_html(table.grid());
}

namespace {

// Splits one markdown row into raw (still padded) cell texts, honoring
// backslash escapes. `line_no` is 1-based, for errors.
std::vector<std::string> split_md_row(const std::string& line, int line_no) {
  if (line.empty() || line.front() != '|') {
    throw ParseError(line_no, 1, "row does not start with '|'");
  }
  std::vector<std::string> cells;
  std::string current;
  bool closed = false;
  for (size_t i = 1; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\') {
      if (i + 1 >= line.size()) {
        throw ParseError(line_no, static_cast<int>(i) + 1,
                         "dangling escape at end of row");
      }
      current.push_back(line[i + 1]);
      ++i;
    } else if (c == '|') {
      cells.push_back(current);
      current.clear();
      closed = i + 1 == line.size();
    } else {
      current.push_back(c);
    }
  }
  if (!closed) {
    throw ParseError(line_no, static_cast<int>(line.size()),
                     "row does not end with '|'");
  }
  return cells;
}

// The renderer pads each cell with one space on both sides; strip that pad.
std::string strip_pad(const std::string& cell) {
  size_t begin = 0, end = cell.size();
  if (begin < end && cell[begin] == ' ') ++begin;
  if (end > begin && cell[end - 1] == ' ') --end;
  return cell.substr(begin, end - begin);
}

bool is_separator_cell(const std::string& cell) {
  if (cell.size() < 3) return false;
  for (char c : cell) {
    if (c != '-') return false;
  }
  return true;
}

}  // namespace

Table parse_markdown_table(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  while (!lines.empty() && is_blank(lines.back())) lines.pop_back();
  if (lines.size() < 2) {
    throw ParseError(static_cast<int>(lines.size() + 1), 1,
                     "expected a header row and a separator row");
  }

  auto header_raw = split_md_row(lines[0], 1);
  const size_t cols = header_raw.size();
  if (cols == 0) throw ParseError(1, 1, "header row has no cells");

  auto sep = split_md_row(lines[1], 2);
  for (auto& cell : sep) {
    if (!is_separator_cell(strip_pad(cell))) {
      throw ParseError(2, 1, "second row is not a '---' separator row");
    }
  }
  if (sep.size() != cols) {
    throw ParseError(2, 1, "separator row has " + std::to_string(sep.size()) +
                               " cells, header has " + std::to_string(cols));
  }

  GridTable grid;
  auto push_row = [&grid](std::vector<std::string> raw) {
    std::vector<std::string> row;
    row.reserve(raw.size());
    for (auto& cell : raw) row.push_back(strip_pad(cell));
    grid.rows.push_back(std::move(row));
  };
  push_row(std::move(header_raw));

  for (size_t i = 2; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    auto cells = split_md_row(lines[i], line_no);
    if (cells.size() != cols) {
      throw ParseError(line_no, 1,
                       "ragged row: " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(cols));
    }
    push_row(std::move(cells));
  }

  Table table;
  table.content = std::move(grid);
  validate(table);
  return table;
}

}  // namespace tablerl
