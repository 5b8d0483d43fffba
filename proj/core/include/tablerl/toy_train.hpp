#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablerl/grpo.hpp"
#include "tablerl/kvconfig.hpp"
#include "tablerl/rewards.hpp"
#include "tablerl/toy_policy.hpp"
#include "tablerl/toy_task.hpp"

namespace tablerl {

struct TrainConfig {
  int group_size = 16;          // rollouts per prompt
  int groups_per_step = 16;     // prompts per optimization step
  double learning_rate = 1e-3;
  int max_prompt_tokens = 256;
  int max_response_tokens = 64;
  double sample_temperature = 1.0;
  double eval_temperature = 0.6;
  double eval_top_p = 1.0;
  int total_steps = 2000;
  uint64_t seed = 0;
  // Optimization epochs per sampled batch; epochs past the first see
  // ratios != 1 and exercise the clipping paths.
  int inner_epochs = 2;
};

void validate(const TrainConfig& config);

TrainConfig train_config_from_kv(const KeyValueConfig& kv);
KeyValueConfig train_config_to_kv(const TrainConfig& config);

struct StepStats {
  int step = 0;
  double mean_reward = 0.0;
  double mean_accuracy = 0.0;
  double mean_format = 0.0;
  double mean_response_len = 0.0;
  double objective = 0.0;  // group-mean GRPO objective at the first epoch
  int groups_skipped = 0;  // skip_group mode only
};

// One GRPO update: samples group_size rollouts per prompt under the current
// policy, scores them with the verifiable rewards, normalizes advantages per
// group, and applies inner_epochs ascent steps of the clipped objective
// averaged over groups. Deterministic given step_seed (single-threaded).
StepStats train_step(TinyPolicy& policy, std::span<const TinyTabTask> prompts,
                     const TrainConfig& train, const RewardConfig& rewards,
                     const ClipConfig& clip, uint64_t step_seed);

struct ToyEvalResult {
  double mean_accuracy = 0.0;
  int count = 0;
};

// One rollout per task at eval temperature / top-p, accuracy reward only.
ToyEvalResult evaluate_policy(const TinyPolicy& policy,
                              std::span<const TinyTabTask> tasks,
                              const TrainConfig& train,
                              const RewardConfig& rewards, uint64_t seed);

// Task curriculum: a fixed pool of generated tasks cycled round-robin, so a
// run is a pure function of its seeds.
struct ToyCurriculum {
  ToyTemplateMix mix;
  int pool_size = 32;
  uint64_t pool_seed = 1;
  // Skip generated tasks whose gold repeats one already in the pool. A pool
  // with a modal answer rewards answering that constant everywhere, which is
  // the degenerate optimum the demo should not sit in.
  bool distinct_golds = true;
  // Keep only tasks whose short-answer gold has at most this many characters
  // (0 = no limit). Exact match gives no partial credit, so the discovery
  // rate falls off exponentially with answer length; the desk-scale run uses
  // single-character answers.
  int max_gold_chars = 0;
};

std::vector<TinyTabTask> build_task_pool(const ToyCurriculum& curriculum);

struct ToyTrainOptions {
  TrainConfig train;
  RewardConfig rewards;
  ClipConfig clip;
  ToyCurriculum curriculum;
  // How a fresh policy should be initialized by runners that construct one.
  ToyInit init = ToyInit::template_primed;
  // When non-empty: learning_curve.jsonl, run_config.cfg and seeds.txt are
  // written under this directory (created if missing).
  std::string out_dir;
};

struct ToyTrainResult {
  std::vector<StepStats> curve;
  ToyEvalResult final_eval;
};

// Full training run; on_step (optional) observes every step's stats.
ToyTrainResult train_toy(TinyPolicy& policy, const ToyTrainOptions& options,
                         const std::function<void(const StepStats&)>& on_step = {});

// Curriculum keys for the flat config file:
//   curriculum_pool_size (32), curriculum_pool_seed (1),
//   curriculum_distinct_golds (true), curriculum_max_gold_chars (0),
//   curriculum_mix (5 comma-separated weights, ToyTemplate order)
ToyCurriculum curriculum_from_kv(const KeyValueConfig& kv);

nlohmann::json to_json(const StepStats& stats);

}  // namespace tablerl
