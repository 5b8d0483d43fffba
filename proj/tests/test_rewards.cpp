#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "tablerl/dataset.hpp"
#include "tablerl/kvconfig.hpp"
#include "tablerl/rewards.hpp"
#include "test_util.hpp"

using namespace tablerl;
using nlohmann::json;

namespace {

GoldAnswer gold_from_json(const json& doc) {
  if (doc.is_array()) {
    ShortList list;
    for (const auto& item : doc) list.items.push_back(item.get<std::string>());
    return list;
  }
  if (doc.is_string()) {
    return Label{doc.get<std::string>() == "entailed" ? TfvLabel::entailed
                                                      : TfvLabel::refuted};
  }
  return Sentence{doc.at("sentence").get<std::string>()};
}

}  // namespace

TEST_CASE("golden reward cases reproduce exactly") {
  std::ifstream in(testutil::golden_path("reward_cases.jsonl"));
  REQUIRE(in.good());
  const RewardConfig config;
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json doc = json::parse(line);
    CAPTURE(doc.at("name").get<std::string>());
    const TaskKind task = task_kind_from_string(doc.at("task").get<std::string>());
    const GoldAnswer gold = gold_from_json(doc.at("gold"));
    const RewardBreakdown got =
        total_reward(doc.at("response").get<std::string>(), gold, task, config);
    CHECK(got.format_stage == doc.at("stage").get<int>());
    CHECK(got.format == doc.at("format").get<double>());
    const double want_accuracy = doc.at("accuracy").get<double>();
    if (want_accuracy == 0.0 || want_accuracy == 1.0) {
      CHECK(got.accuracy == want_accuracy);
    } else {
      CHECK(got.accuracy == doctest::Approx(want_accuracy).epsilon(1e-12));
    }
    const double want_total = doc.at("total").get<double>();
    CHECK(got.total == doctest::Approx(want_total).epsilon(1e-12));
    // The combination identity must hold bit-for-bit.
    CHECK(got.total == config.accuracy_weight * got.accuracy +
                           config.format_weight * got.format);
    ++cases;
  }
  CHECK(cases >= 30);
}

TEST_CASE("accuracy reward per task") {
  const RewardConfig config;
  ParsedResponse ok;
  ok.format_stage = 4;

  SUBCASE("TQA exact match") {
    ok.parsed_answer = ShortList{{"1934"}};
    CHECK(accuracy_reward(ok, ShortList{{"1934"}}, TaskKind::tqa, config) == 1.0);
    CHECK(accuracy_reward(ok, ShortList{{"1935"}}, TaskKind::tqa, config) == 0.0);
  }
  SUBCASE("TFV label match") {
    ok.parsed_answer = Label{TfvLabel::refuted};
    CHECK(accuracy_reward(ok, Label{TfvLabel::entailed}, TaskKind::tfv, config) == 0.0);
    CHECK(accuracy_reward(ok, Label{TfvLabel::refuted}, TaskKind::tfv, config) == 1.0);
  }
  SUBCASE("FFTQA blended metrics") {
    ok.parsed_answer = Sentence{"exact same words"};
    CHECK(accuracy_reward(ok, Sentence{"exact same words"}, TaskKind::fftqa, config) == 1.0);
  }
  SUBCASE("missing or mistyped answers score zero") {
    ParsedResponse none;
    CHECK(accuracy_reward(none, ShortList{{"x"}}, TaskKind::tqa, config) == 0.0);
    ParsedResponse wrong;
    wrong.format_stage = 3;
    wrong.parsed_answer = Untyped{json("x")};
    CHECK(accuracy_reward(wrong, ShortList{{"x"}}, TaskKind::tqa, config) == 0.0);
  }
  SUBCASE("gold/task mismatch throws") {
    ok.parsed_answer = ShortList{{"x"}};
    CHECK_THROWS_AS(accuracy_reward(ok, Label{TfvLabel::entailed}, TaskKind::tqa, config),
                    GoldTaskMismatch);
  }
}

TEST_CASE("total reward combines components linearly") {
  const RewardConfig config;
  const auto full = total_reward(
      "<think>t</think> <answer>{\"answer\": [\"7\"]}</answer>", ShortList{{"7"}},
      TaskKind::tqa, config);
  CHECK(full.total == 1.2);
  CHECK(full.accuracy == 1.0);
  CHECK(full.format == 1.0);

  const auto zero = total_reward("nothing here", ShortList{{"7"}}, TaskKind::tqa, config);
  CHECK(zero.total == 0.0);

  const auto wrong_tfv = total_reward(
      "<think>t</think> <answer>{\"answer\": \"refuted\"}</answer>",
      Label{TfvLabel::entailed}, TaskKind::tfv, config);
  CHECK(wrong_tfv.total == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(wrong_tfv.accuracy == 0.0);
  CHECK(wrong_tfv.format == 1.0);
}

TEST_CASE("no stage<3 response can earn accuracy on TQA or TFV") {
  const RewardConfig config;
  testutil::Rand rng(73);
  const std::string pieces[] = {"<think>", "</think>", "<answer>", "</answer>",
                                "1934", "entailed", "{\"answer\"", ": [\"1934\"]}",
                                " ", "x"};
  for (int iter = 0; iter < 3000; ++iter) {
    std::string raw;
    for (int i = rng.below(10); i > 0; --i) raw += pieces[static_cast<size_t>(rng.below(10))];
    const TaskKind task = rng.below(2) == 0 ? TaskKind::tqa : TaskKind::tfv;
    const GoldAnswer gold =
        task == TaskKind::tqa ? GoldAnswer(ShortList{{"1934"}})
                              : GoldAnswer(Label{TfvLabel::entailed});
    const auto breakdown = total_reward(raw, gold, task, config);
    if (breakdown.format_stage < 3) CHECK(breakdown.accuracy == 0.0);
  }
}

TEST_CASE("format gate suppresses accuracy below stage 3") {
  RewardConfig gated;
  gated.format_gate = true;
  // Gating is observable only through the total formula holding with the
  // gated accuracy; stage>=3 responses are unaffected.
  const auto ok = total_reward(
      "<think>t</think> <answer>{\"answer\": [\"7\"]}</answer>ext", ShortList{{"7"}},
      TaskKind::tqa, gated);
  CHECK(ok.format_stage == 3);
  CHECK(ok.accuracy == 1.0);
}

TEST_CASE("batch rewards are pointwise equal to scalar calls") {
  const RewardConfig config;
  TaskInstance instance = testutil::golden_instance(TaskKind::tqa);
  const std::vector<std::string> responses = {
      "<think>a</think> <answer>{\"answer\": [\"Norway\"]}</answer>",
      "<think>b</think> <answer>{\"answer\": [\"Canada\"]}</answer>",
      "",
      "<think>c</think> <answer>{\"answer\": [\"Norway\"]}</answer>",
  };
  const auto batch = batch_rewards(responses, instance, config);
  REQUIRE(batch.size() == responses.size());
  for (size_t i = 0; i < responses.size(); ++i) {
    CHECK(batch[i] == total_reward(responses[i], instance.gold, instance.task, config));
  }
  CHECK_THROWS_AS(batch_rewards(std::vector<std::string>{}, instance, config), Error);

  instance.gold = Label{TfvLabel::entailed};
  CHECK_THROWS_AS(batch_rewards(responses, instance, config), GoldTaskMismatch);
}

TEST_CASE("reward config round-trips through the flat key-value format") {
  RewardConfig config;
  config.format_weight = 0.35;
  config.format_gate = true;
  config.normalization.lowercase = false;
  config.format_stage_rewards = {0.0, 0.1, 0.3, 0.6, 1.0};
  const KeyValueConfig kv = reward_config_to_kv(config);
  const RewardConfig back = reward_config_from_kv(kv);
  CHECK(back.format_weight == config.format_weight);
  CHECK(back.format_gate == config.format_gate);
  CHECK(back.normalization.lowercase == false);
  CHECK(back.format_stage_rewards == config.format_stage_rewards);

  const auto parsed = KeyValueConfig::from_string(
      "# comment\nformat_weight = 0.5\nnorm_lowercase = false\n");
  const RewardConfig from_text = reward_config_from_kv(parsed);
  CHECK(from_text.format_weight == 0.5);
  CHECK(from_text.normalization.lowercase == false);
  CHECK(from_text.accuracy_weight == 1.0);
}

TEST_CASE("invalid reward configs are rejected") {
  RewardConfig bad;
  bad.fftqa_bleu_weight = 0.9;  // blend no longer sums to 1
  CHECK_THROWS_AS(validate(bad), BadConfig);
  RewardConfig negative;
  negative.format_weight = -0.1;
  CHECK_THROWS_AS(validate(negative), BadConfig);
}
