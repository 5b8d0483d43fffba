#include <benchmark/benchmark.h>

#include "tablerl/grpo.hpp"
#include "tablerl/rewards.hpp"

namespace {

tablerl::TaskInstance tqa_instance() {
  tablerl::TaskInstance instance;
  instance.id = "bench";
  instance.task = tablerl::TaskKind::tqa;
  instance.table.content =
      tablerl::GridTable{{{"A", "B"}, {"11", "37"}, {"4", "90"}}};
  instance.query = "What is the value in row 1 of column B?";
  instance.gold = tablerl::ShortList{{"37"}};
  return instance;
}

}  // namespace

static void BM_TotalReward(benchmark::State& state) {
  const auto instance = tqa_instance();
  const tablerl::RewardConfig config;
  const std::string response =
      "<think>row 1 column B is 37</think> "
      "<answer>```json\n{\"answer\": [\"37\"]}\n```</answer>";
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tablerl::total_reward(response, instance.gold, instance.task, config));
  }
}
BENCHMARK(BM_TotalReward);

static void BM_BatchRewards(benchmark::State& state) {
  const auto instance = tqa_instance();
  const tablerl::RewardConfig config;
  std::vector<std::string> responses(
      static_cast<size_t>(state.range(0)),
      "<think>x</think> <answer>{\"answer\": [\"37\"]}</answer>");
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::batch_rewards(responses, instance, config));
  }
}
BENCHMARK(BM_BatchRewards)->Arg(16)->Arg(64);

static void BM_GroupAdvantages(benchmark::State& state) {
  std::vector<double> rewards(static_cast<size_t>(state.range(0)));
  for (size_t i = 0; i < rewards.size(); ++i) {
    rewards[i] = static_cast<double>(i % 3) * 0.5;
  }
  const tablerl::ClipConfig clip;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::group_advantages(rewards, clip));
  }
}
BENCHMARK(BM_GroupAdvantages)->Arg(16)->Arg(64);

static void BM_GrpoObjectiveAndGrad(benchmark::State& state) {
  const int group = 16;
  const int tokens = static_cast<int>(state.range(0));
  tablerl::GroupBatch batch;
  for (int i = 0; i < group; ++i) {
    tablerl::RolloutLogProbs lp;
    for (int t = 0; t < tokens; ++t) {
      lp.old_logp.push_back(-1.0 - 0.01 * t);
      lp.new_logp.push_back(-1.0 - 0.013 * t);
    }
    batch.rollouts.push_back(std::move(lp));
    batch.rewards.push_back(i % 2 ? 1.2 : 0.2);
  }
  const tablerl::ClipConfig clip;
  tablerl::compute_advantages(batch, clip);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::grpo_objective(batch, clip));
    benchmark::DoNotOptimize(tablerl::grpo_grad_new_logp(batch, clip));
  }
}
BENCHMARK(BM_GrpoObjectiveAndGrad)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
