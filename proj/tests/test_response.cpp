#include <doctest.h>

#include "tablerl/response.hpp"
#include "test_util.hpp"

using namespace tablerl;

TEST_CASE("fully conformant TQA response reaches stage 4") {
  const auto parsed = parse_response(
      "<think>x</think> <answer>```json\n{\"answer\": [\"3\"]}\n```</answer>",
      TaskKind::tqa);
  CHECK(parsed.format_stage == 4);
  REQUIRE(parsed.parsed_answer.has_value());
  const auto* list = std::get_if<ShortList>(&*parsed.parsed_answer);
  REQUIRE(list != nullptr);
  CHECK(list->items == std::vector<std::string>{"3"});
  CHECK(parsed.think == "x");
}

TEST_CASE("missing answer tags stop at stage 1") {
  const auto parsed = parse_response("<think>x</think> answer is 3", TaskKind::tqa);
  CHECK(parsed.format_stage == 1);
  CHECK_FALSE(parsed.parsed_answer.has_value());
}

TEST_CASE("wrong label vocabulary stops at stage 3 for TFV") {
  const auto parsed = parse_response(
      "<think>x</think><answer>{\"answer\": \"yes\"}</answer>", TaskKind::tfv);
  CHECK(parsed.format_stage == 3);
  REQUIRE(parsed.parsed_answer.has_value());
  CHECK(std::holds_alternative<Untyped>(*parsed.parsed_answer));
}

TEST_CASE("the answer JSON may be embedded in other block text") {
  const auto parsed = parse_response(
      "<think>x</think><answer>my answer: {\"answer\": [\"7\"]} done</answer>",
      TaskKind::tqa);
  CHECK(parsed.format_stage == 4);
  CHECK(std::get<ShortList>(*parsed.parsed_answer).items ==
        std::vector<std::string>{"7"});

  // Objects without the key are skipped, not repaired.
  const auto second = parse_response(
      "<think>x</think><answer>{\"note\": 1} {\"answer\": [\"7\"]}</answer>",
      TaskKind::tqa);
  CHECK(second.format_stage == 4);
  CHECK(std::get<ShortList>(*second.parsed_answer).items ==
        std::vector<std::string>{"7"});

  const auto none = parse_response(
      "<think>x</think><answer>{\"note\": 1} and {broken</answer>", TaskKind::tqa);
  CHECK(none.format_stage == 2);

  // Braces inside JSON strings do not confuse the scan.
  const auto tricky = parse_response(
      "<think>x</think><answer>{\"answer\": [\"a}b\"]}</answer>", TaskKind::tqa);
  CHECK(tricky.format_stage == 4);
  CHECK(std::get<ShortList>(*tricky.parsed_answer).items ==
        std::vector<std::string>{"a}b"});
}

TEST_CASE("last answer pair wins and extra pairs cap the stage") {
  const auto parsed = parse_response(
      "<think>x</think><answer>{\"answer\": [\"1\"]}</answer>"
      "<answer>{\"answer\": [\"2\"]}</answer>",
      TaskKind::tqa);
  CHECK(parsed.format_stage == 3);
  const auto* list = std::get_if<ShortList>(&*parsed.parsed_answer);
  REQUIRE(list != nullptr);
  CHECK(list->items == std::vector<std::string>{"2"});
}

TEST_CASE("TFV labels are matched case-insensitively with trim") {
  const auto parsed = parse_response(
      "<think>x</think><answer>{\"answer\": \" Entailed \"}</answer>", TaskKind::tfv);
  CHECK(parsed.format_stage == 4);
  CHECK(std::get<Label>(*parsed.parsed_answer).value == TfvLabel::entailed);
}

TEST_CASE("format reward follows the stage schedule") {
  ParsedResponse r;
  const double expected[5] = {0.0, 0.2, 0.4, 0.7, 1.0};
  for (int stage = 0; stage <= 4; ++stage) {
    r.format_stage = stage;
    CHECK(format_reward(r) == expected[stage]);
  }
}

TEST_CASE("format reward is monotone over cumulative stage upgrades") {
  // Build one response per stage from shared parts and check rewards never
  // decrease as stages are added.
  testutil::Rand rng(7);
  const std::string fillers = "abc123 ,.!<>{}[]\"'";
  for (int iter = 0; iter < 2000; ++iter) {
    std::string think;
    for (int i = rng.below(8); i > 0; --i) think.push_back(fillers[static_cast<size_t>(rng.below(static_cast<int>(fillers.size())))]);
    const std::string stage0 = think;                       // no structure
    const std::string stage1 = "<think>" + think + "</think> trailing";
    const std::string stage2 =
        "<think>" + think + "</think><answer>no json</answer> x";
    const std::string stage3 =
        "<think>" + think + "</think><answer>{\"answer\": 5}</answer> x";
    const std::string stage4 =
        "<think>" + think + "</think> <answer>{\"answer\": [\"5\"]}</answer>";
    double last = -1.0;
    for (const auto& raw : {stage0, stage1, stage2, stage3, stage4}) {
      const double reward = format_reward(parse_response(raw, TaskKind::tqa));
      CHECK(reward >= last);
      last = reward;
    }
  }
}

TEST_CASE("parse_response is total on arbitrary bytes") {
  testutil::Rand rng(99);
  const std::string pieces[] = {"<think>", "</think>", "<answer>", "</answer>",
                                "{\"answer\":", "[\"x\"]", "}", "```json",
                                "```", "\n", "\xff\xfe", "{", "\"", " "};
  for (int iter = 0; iter < 5000; ++iter) {
    std::string raw;
    for (int i = rng.below(12); i > 0; --i) {
      if (rng.below(3) == 0) {
        raw.push_back(static_cast<char>(rng.below(256)));
      } else {
        raw += pieces[static_cast<size_t>(rng.below(14))];
      }
    }
    const auto task = static_cast<TaskKind>(rng.below(3));
    const auto parsed = parse_response(raw, task);
    CHECK(parsed.format_stage >= 0);
    CHECK(parsed.format_stage <= 4);
    if (parsed.format_stage >= 3) CHECK(parsed.parsed_answer.has_value());
  }
}

TEST_CASE("re-parsing a conformant response is stable") {
  const std::string raw =
      "<think>t</think> <answer>{\"answer\": [\"a\", \"b\"]}</answer>";
  const auto first = parse_response(raw, TaskKind::tqa);
  const auto again = parse_response(raw, TaskKind::tqa);
  CHECK(first.format_stage == again.format_stage);
  CHECK(std::get<ShortList>(*first.parsed_answer).items ==
        std::get<ShortList>(*again.parsed_answer).items);
}

TEST_CASE("custom stage weights are honored") {
  ParsedResponse r;
  r.format_stage = 2;
  CHECK(format_reward(r, {0.0, 0.1, 0.5, 0.9, 1.0}) == 0.5);
}
