#include <benchmark/benchmark.h>

#include "tablerl/toy_policy.hpp"
#include "tablerl/toy_task.hpp"

namespace {

std::vector<int> bench_prompt_ids() {
  tablerl::ToyTemplateMix mix;
  mix.weights = {1, 0, 0, 0, 0};
  const auto task = tablerl::generate_task(5, mix);
  return tablerl::TinyPolicy::prompt_char_ids(tablerl::policy_prompt(task, 256), 256);
}

}  // namespace

static void BM_SampleRollout(benchmark::State& state) {
  const tablerl::TinyPolicy policy(tablerl::ToyPolicyDims{}, 11,
                                   tablerl::ToyInit::template_primed);
  const auto prompt = bench_prompt_ids();
  uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        policy.sample(prompt, 1.0, 1.0, static_cast<int>(state.range(0)), ++seed));
  }
}
BENCHMARK(BM_SampleRollout)->Arg(16)->Arg(64);

static void BM_ScoreSequence(benchmark::State& state) {
  const tablerl::TinyPolicy policy(tablerl::ToyPolicyDims{}, 11,
                                   tablerl::ToyInit::template_primed);
  const auto prompt = bench_prompt_ids();
  const auto rollout = policy.sample(prompt, 1.0, 1.0, 48, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy.score_sequence(prompt, rollout.tokens, 1.0, 1.0));
  }
}
BENCHMARK(BM_ScoreSequence);

static void BM_AccumulateGrad(benchmark::State& state) {
  const tablerl::TinyPolicy policy(tablerl::ToyPolicyDims{}, 11,
                                   tablerl::ToyInit::template_primed);
  const auto prompt = bench_prompt_ids();
  const auto rollout = policy.sample(prompt, 1.0, 1.0, 48, 3);
  std::vector<double> coeff(rollout.tokens.size(), 0.01);
  std::vector<double> grad(policy.param_count(), 0.0);
  for (auto _ : state) {
    policy.accumulate_grad(prompt, rollout.tokens, coeff, 1.0, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_AccumulateGrad);

BENCHMARK_MAIN();
