#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tablerl/errors.hpp"

namespace tablerl {

// Per-token natural log-probabilities of one sampled response under the
// sampling-time (old) policy and the current (new) policy. Sequences are
// aligned and non-empty; log-probs are finite and <= 0.
struct RolloutLogProbs {
  std::vector<double> old_logp;
  std::vector<double> new_logp;
};

// G rollouts sampled for one prompt, their scalar rewards, and (once
// computed) the group-normalized advantage shared by every token of a
// rollout.
struct GroupBatch {
  std::vector<RolloutLogProbs> rollouts;
  std::vector<double> rewards;
  std::optional<std::vector<double>> advantages;

  size_t group_size() const { return rollouts.size(); }
  size_t total_tokens() const;
};

enum class DegenerateGroupMode {
  zero_advantages,  // all-equal rewards yield zero advantages (group is inert)
  skip_group,       // all-equal rewards raise DegenerateGroup
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;
  DegenerateGroupMode degenerate_group_mode = DegenerateGroupMode::zero_advantages;
};

// (R_i - mean) / std over the group, with the population standard deviation.
// Throws GroupTooSmall when G < 2 and DegenerateGroup when all rewards are
// equal in skip_group mode.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     const ClipConfig& config);

// True when every reward in the group is equal (zero population std).
bool group_is_degenerate(std::span<const double> rewards);

// exp(new_logp - old_logp), the per-token probability ratio.
double ratio(double old_logp, double new_logp);

// Validates alignment/finiteness and fills batch.advantages.
// Throws on structural violations; honors the degenerate-group mode.
void compute_advantages(GroupBatch& batch, const ClipConfig& config);

// Token-level clipped surrogate for one group:
//   J = (1/sum_i |o_i|) sum_i sum_t min(r_it * A_i,
//                                       clip(r_it, 1-eps_low, 1+eps_high) * A_i)
// No KL term. Throws MissingAdvantages when advantages are absent.
double grpo_objective(const GroupBatch& batch, const ClipConfig& config);

// dJ/d(new_logp_it): (1/N) * r_it * A_i where the unclipped branch attains
// the min (ties included), 0 where the clipped branch is strictly smaller.
// Shapes mirror batch.rollouts.
std::vector<std::vector<double>> grpo_grad_new_logp(const GroupBatch& batch,
                                                    const ClipConfig& config);

}  // namespace tablerl
