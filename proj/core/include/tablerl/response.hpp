#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "tablerl/table.hpp"

namespace tablerl {

// Answer payload extracted from the <answer> block. Untyped carries the raw
// JSON "answer" value when it does not have the shape the task expects.
struct Untyped {
  nlohmann::json value;
  bool operator==(const Untyped&) const = default;
};

using ParsedAnswer = std::variant<ShortList, Label, Sentence, Untyped>;

// Structural conformance stages, cumulative (each stage implies the ones
// below it):
//   0  no recognizable structure
//   1  well-nested <think>...</think> pair
//   2  stage 1 and an <answer>...</answer> pair after it
//   3  stage 2 and the answer block contains a JSON object with an "answer"
//      key (fenced ```json or bare JSON, possibly embedded in other text)
//   4  stage 3, the answer value is well-typed for the task, and nothing but
//      whitespace appears outside the two tag pairs
struct ParsedResponse {
  std::optional<std::string> think;
  std::optional<std::string> answer_block;
  std::optional<ParsedAnswer> parsed_answer;
  int format_stage = 0;
};

// Total on any byte sequence: malformedness is graded into format_stage,
// never thrown. When several <answer> pairs follow the think block, the last
// one is used; the earlier ones count as stray text and cap the stage at 3.
ParsedResponse parse_response(const std::string& raw, TaskKind task);

// Stage -> partial credit. Full credit only for strictly conformant output.
inline constexpr std::array<double, 5> kDefaultFormatStageRewards = {
    0.0, 0.2, 0.4, 0.7, 1.0};

double format_reward(const ParsedResponse& parsed);
double format_reward(const ParsedResponse& parsed,
                     const std::array<double, 5>& stage_rewards);

}  // namespace tablerl
