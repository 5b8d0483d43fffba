#include "tablerl/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace tablerl {

size_t GroupBatch::total_tokens() const {
  size_t n = 0;
  for (const auto& r : rollouts) n += r.old_logp.size();
  return n;
}

namespace {

void validate_rewards(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw GroupTooSmall("group has " + std::to_string(rewards.size()) +
                        " rollouts, need at least 2");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error("non-finite reward in group");
  }
}

void validate_batch(const GroupBatch& batch) {
  if (batch.rollouts.size() != batch.rewards.size()) {
    throw Error("group batch: rollouts and rewards are misaligned");
  }
  validate_rewards(batch.rewards);
  for (const auto& rollout : batch.rollouts) {
    if (rollout.old_logp.empty() ||
        rollout.old_logp.size() != rollout.new_logp.size()) {
      throw Error("rollout log-prob sequences are empty or misaligned");
    }
    for (size_t t = 0; t < rollout.old_logp.size(); ++t) {
      if (!std::isfinite(rollout.old_logp[t]) ||
          !std::isfinite(rollout.new_logp[t]) || rollout.old_logp[t] > 0.0 ||
          rollout.new_logp[t] > 0.0) {
        throw Error("log-probabilities must be finite and <= 0");
      }
    }
  }
}

}  // namespace

bool group_is_degenerate(std::span<const double> rewards) {
  return std::all_of(rewards.begin(), rewards.end(),
                     [&](double r) { return r == rewards.front(); });
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     const ClipConfig& config) {
  validate_rewards(rewards);
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;  // population variance, no Bessel correction
  const double std_dev = std::sqrt(var);

  if (std_dev == 0.0 || group_is_degenerate(rewards)) {
    if (config.degenerate_group_mode == DegenerateGroupMode::skip_group) {
      throw DegenerateGroup("all rewards in the group are equal");
    }
    return std::vector<double>(rewards.size(), 0.0);
  }
  std::vector<double> advantages;
  advantages.reserve(rewards.size());
  for (double r : rewards) advantages.push_back((r - mean) / std_dev);
  return advantages;
}

double ratio(double old_logp, double new_logp) {
  return std::exp(new_logp - old_logp);
}

void compute_advantages(GroupBatch& batch, const ClipConfig& config) {
  validate_batch(batch);
  batch.advantages = group_advantages(batch.rewards, config);
}

namespace {

const std::vector<double>& advantages_or_throw(const GroupBatch& batch) {
  if (!batch.advantages) {
    throw MissingAdvantages("call compute_advantages before the objective");
  }
  if (batch.advantages->size() != batch.rollouts.size()) {
    throw Error("advantages misaligned with rollouts");
  }
  return *batch.advantages;
}

}  // namespace

double grpo_objective(const GroupBatch& batch, const ClipConfig& config) {
  const auto& advantages = advantages_or_throw(batch);
  validate_batch(batch);
  const double total = static_cast<double>(batch.total_tokens());
  double sum = 0.0;
  for (size_t i = 0; i < batch.rollouts.size(); ++i) {
    const auto& rollout = batch.rollouts[i];
    const double adv = advantages[i];
    for (size_t t = 0; t < rollout.old_logp.size(); ++t) {
      const double r = ratio(rollout.old_logp[t], rollout.new_logp[t]);
      const double clipped =
          std::clamp(r, 1.0 - config.eps_low, 1.0 + config.eps_high);
      sum += std::min(r * adv, clipped * adv);
    }
  }
  return sum / total;
}

std::vector<std::vector<double>> grpo_grad_new_logp(const GroupBatch& batch,
                                                    const ClipConfig& config) {
  const auto& advantages = advantages_or_throw(batch);
  validate_batch(batch);
  const double total = static_cast<double>(batch.total_tokens());
  std::vector<std::vector<double>> grads;
  grads.reserve(batch.rollouts.size());
  for (size_t i = 0; i < batch.rollouts.size(); ++i) {
    const auto& rollout = batch.rollouts[i];
    const double adv = advantages[i];
    std::vector<double> grad(rollout.old_logp.size(), 0.0);
    for (size_t t = 0; t < rollout.old_logp.size(); ++t) {
      const double r = ratio(rollout.old_logp[t], rollout.new_logp[t]);
      const double clipped =
          std::clamp(r, 1.0 - config.eps_low, 1.0 + config.eps_high);
      // d(r*A)/d(new_logp) = r*A; the clipped branch is constant in theta.
      // On ties the unclipped branch wins, so the gradient still flows.
      if (r * adv <= clipped * adv) grad[t] = r * adv / total;
    }
    grads.push_back(std::move(grad));
  }
  return grads;
}

}  // namespace tablerl
