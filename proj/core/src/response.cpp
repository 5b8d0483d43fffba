#include "tablerl/response.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace tablerl {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string lower_trim(std::string_view s) {
  s = trim(s);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Strips a ``` or ```json fence wrapper if present. No other JSON repair.
std::string_view strip_fence(std::string_view block) {
  std::string_view t = trim(block);
  if (!t.starts_with("```")) return t;
  size_t body = t.find('\n');
  if (body == std::string_view::npos) return t;
  std::string_view inner = t.substr(body + 1);
  std::string_view tail = trim(inner);
  if (tail.ends_with("```")) {
    size_t cut = inner.rfind("```");
    inner = inner.substr(0, cut);
  }
  return trim(inner);
}

// First well-formed JSON object in `text` carrying an "answer" key. The
// block only has to contain the snippet, so candidates are located with a
// string-aware balanced-brace scan; malformed candidates are skipped, never
// repaired.
std::optional<nlohmann::json> find_answer_object(std::string_view text) {
  for (size_t i = text.find('{'); i != std::string_view::npos;
       i = text.find('{', i + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (size_t j = i; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          nlohmann::json doc = nlohmann::json::parse(
              text.substr(i, j - i + 1), /*cb=*/nullptr, /*allow_exceptions=*/false);
          if (!doc.is_discarded() && doc.is_object() && doc.contains("answer")) {
            return doc;
          }
          break;  // balanced but unusable; try the next opening brace
        }
      }
    }
  }
  return std::nullopt;
}

struct TagSpan {
  size_t open_begin = 0;   // index of '<'
  size_t inner_begin = 0;  // first char after the open tag
  size_t inner_end = 0;    // index of '<' of the close tag
  size_t close_end = 0;    // first char after the close tag
};

std::optional<TagSpan> find_pair(const std::string& text, std::string_view open,
                                 std::string_view close, size_t from) {
  TagSpan span;
  span.open_begin = text.find(open, from);
  if (span.open_begin == std::string::npos) return std::nullopt;
  span.inner_begin = span.open_begin + open.size();
  span.inner_end = text.find(close, span.inner_begin);
  if (span.inner_end == std::string::npos) return std::nullopt;
  span.close_end = span.inner_end + close.size();
  return span;
}

// Typed view of the JSON "answer" value for the given task, or Untyped when
// the shape does not fit.
ParsedAnswer type_answer(const nlohmann::json& value, TaskKind task) {
  switch (task) {
    case TaskKind::tqa:
      if (value.is_array() &&
          std::all_of(value.begin(), value.end(),
                      [](const nlohmann::json& v) { return v.is_string(); })) {
        ShortList list;
        for (const auto& v : value) list.items.push_back(v.get<std::string>());
        return list;
      }
      break;
    case TaskKind::tfv:
      if (value.is_string()) {
        const std::string label = lower_trim(value.get<std::string>());
        if (label == "entailed") return Label{TfvLabel::entailed};
        if (label == "refuted") return Label{TfvLabel::refuted};
      }
      break;
    case TaskKind::fftqa:
      if (value.is_string()) return Sentence{value.get<std::string>()};
      break;
  }
  return Untyped{value};
}

}  // namespace

ParsedResponse parse_response(const std::string& raw, TaskKind task) {
  ParsedResponse out;

  auto think = find_pair(raw, kThinkOpen, kThinkClose, 0);
  if (!think) return out;  // stage 0
  out.think = raw.substr(think->inner_begin,
                         think->inner_end - think->inner_begin);
  out.format_stage = 1;

  // All <answer> pairs after the think block, non-overlapping; keep the last.
  std::optional<TagSpan> answer;
  size_t answer_count = 0;
  size_t cursor = think->close_end;
  while (auto next = find_pair(raw, kAnswerOpen, kAnswerClose, cursor)) {
    answer = next;
    ++answer_count;
    cursor = next->close_end;
  }
  if (!answer) return out;  // stage 1
  out.answer_block = raw.substr(answer->inner_begin,
                                answer->inner_end - answer->inner_begin);
  out.format_stage = 2;

  const std::string_view payload = strip_fence(*out.answer_block);
  const auto doc = find_answer_object(payload);
  if (!doc) return out;  // stage 2
  out.parsed_answer = type_answer((*doc)["answer"], task);
  out.format_stage = 3;

  const bool well_typed = !std::holds_alternative<Untyped>(*out.parsed_answer);
  const bool clean_outside =
      answer_count == 1 &&
      whitespace_only(std::string_view(raw).substr(0, think->open_begin)) &&
      whitespace_only(std::string_view(raw).substr(
          think->close_end, answer->open_begin - think->close_end)) &&
      whitespace_only(std::string_view(raw).substr(answer->close_end));
  if (well_typed && clean_outside) out.format_stage = 4;
  return out;
}

double format_reward(const ParsedResponse& parsed) {
  return format_reward(parsed, kDefaultFormatStageRewards);
}

double format_reward(const ParsedResponse& parsed,
                     const std::array<double, 5>& stage_rewards) {
  const int stage = std::clamp(parsed.format_stage, 0, 4);
  return stage_rewards[static_cast<size_t>(stage)];
}

}  // namespace tablerl
