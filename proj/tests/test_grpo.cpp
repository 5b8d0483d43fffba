#include <doctest.h>

#include <cmath>

#include "tablerl/grpo.hpp"
#include "test_util.hpp"

using namespace tablerl;

namespace {

GroupBatch make_batch(const std::vector<std::vector<double>>& old_lp,
                      const std::vector<std::vector<double>>& new_lp,
                      const std::vector<double>& rewards) {
  GroupBatch batch;
  for (size_t i = 0; i < old_lp.size(); ++i) {
    batch.rollouts.push_back({old_lp[i], new_lp[i]});
  }
  batch.rewards = rewards;
  return batch;
}

// Random batch with ratios kept away from the clip boundaries.
GroupBatch random_batch(testutil::Rand& rng, const ClipConfig& clip,
                        int max_group = 6, int max_len = 7) {
  const int group = 2 + rng.below(max_group - 1);
  GroupBatch batch;
  for (int i = 0; i < group; ++i) {
    const int len = 1 + rng.below(max_len);
    std::vector<double> old_lp(static_cast<size_t>(len)), new_lp(static_cast<size_t>(len));
    for (int t = 0; t < len; ++t) {
      // old <= -1 keeps new = old + log_ratio safely below zero even after
      // the finite-difference nudges.
      old_lp[static_cast<size_t>(t)] = -rng.range(1.0, 3.0);
      double log_ratio;
      do {
        log_ratio = rng.range(-0.6, 0.5);
        const double r = std::exp(log_ratio);
        const bool near_boundary =
            std::abs(r - (1.0 - clip.eps_low)) < 0.03 ||
            std::abs(r - (1.0 + clip.eps_high)) < 0.03;
        if (!near_boundary) break;
      } while (true);
      new_lp[static_cast<size_t>(t)] = old_lp[static_cast<size_t>(t)] + log_ratio;
    }
    batch.rollouts.push_back({std::move(old_lp), std::move(new_lp)});
  }
  for (int i = 0; i < group; ++i) batch.rewards.push_back(rng.range(0.0, 1.4));
  // Nudge apart so the group is never degenerate.
  batch.rewards[0] += 0.37;
  return batch;
}

}  // namespace

TEST_CASE("group advantages standardize with the population std") {
  const ClipConfig clip;
  CHECK(group_advantages(std::vector<double>{1, 0, 0, 1}, clip) ==
        std::vector<double>{1, -1, -1, 1});
  CHECK(group_advantages(std::vector<double>{0.7, 0.7, 0.7}, clip) ==
        std::vector<double>{0, 0, 0});
  const auto a = group_advantages(std::vector<double>{3, 1, 2}, clip);
  CHECK(a[0] == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(a[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("degenerate groups follow the configured mode") {
  ClipConfig skip;
  skip.degenerate_group_mode = DegenerateGroupMode::skip_group;
  CHECK_THROWS_AS(group_advantages(std::vector<double>{1, 1, 1}, skip),
                  DegenerateGroup);
  CHECK_THROWS_AS(group_advantages(std::vector<double>{1}, skip), GroupTooSmall);
  CHECK(group_is_degenerate(std::vector<double>{2, 2}));
  CHECK_FALSE(group_is_degenerate(std::vector<double>{2, 3}));
}

TEST_CASE("advantages have mean 0 and population std 1") {
  testutil::Rand rng(5);
  const ClipConfig clip;
  for (int iter = 0; iter < 1200; ++iter) {
    const int group = 2 + rng.below(63);
    std::vector<double> rewards(static_cast<size_t>(group));
    for (auto& r : rewards) r = rng.range(-2.0, 2.0);
    if (group_is_degenerate(rewards)) continue;
    const auto adv = group_advantages(rewards, clip);
    double mean = 0.0, var = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(group);
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(group);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("advantages are invariant to reward shift and positive scale") {
  testutil::Rand rng(31);
  const ClipConfig clip;
  for (int iter = 0; iter < 300; ++iter) {
    const int group = 2 + rng.below(15);
    std::vector<double> rewards(static_cast<size_t>(group));
    for (auto& r : rewards) r = rng.range(-1.0, 1.0);
    if (group_is_degenerate(rewards)) continue;
    const auto base = group_advantages(rewards, clip);
    const double shift = rng.range(-5.0, 5.0);
    const double scale = rng.range(0.1, 4.0);
    std::vector<double> shifted = rewards, scaled = rewards;
    for (auto& r : shifted) r += shift;
    for (auto& r : scaled) r *= scale;
    const auto a_shift = group_advantages(shifted, clip);
    const auto a_scale = group_advantages(scaled, clip);
    for (size_t i = 0; i < base.size(); ++i) {
      CHECK(a_shift[i] == doctest::Approx(base[i]).epsilon(1e-9));
      CHECK(a_scale[i] == doctest::Approx(base[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("ratio is exp of the log-prob difference") {
  CHECK(ratio(-1.0, -1.0) == 1.0);
  CHECK(ratio(std::log(0.5), std::log(0.25)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ratio(std::log(0.1), std::log(0.2)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("objective worked examples") {
  const ClipConfig clip;  // eps_low 0.2, eps_high 0.28

  SUBCASE("ratios 1 with opposite advantages cancel") {
    auto batch = make_batch({{-1.0, -2.0}, {-0.5, -1.5}},
                            {{-1.0, -2.0}, {-0.5, -1.5}}, {1.0, 0.0});
    batch.advantages = std::vector<double>{1.0, -1.0};
    CHECK(grpo_objective(batch, clip) == 0.0);
  }

  SUBCASE("positive advantage is capped at 1+eps_high") {
    // One rollout with r = 1.5 at each token and a sibling with r = 1.
    const double lr = std::log(1.5);
    auto batch = make_batch({{-1.0, -1.0}, {-1.0}},
                            {{-1.0 + lr, -1.0 + lr}, {-1.0}}, {1.0, 0.0});
    batch.advantages = std::vector<double>{1.0, 0.0};
    // Tokens: two clipped at 1.28, one zero-advantage. N = 3.
    CHECK(grpo_objective(batch, clip) == doctest::Approx((1.28 * 2) / 3.0).epsilon(1e-12));
  }

  SUBCASE("negative advantage is floored at 1-eps_low") {
    const double lr = std::log(0.5);
    auto batch = make_batch({{-1.0}, {-1.0}}, {{-1.0 + lr}, {-1.0}}, {0.0, 1.0});
    batch.advantages = std::vector<double>{-1.0, 0.0};
    // min(0.5 * -1, 0.8 * -1) = -0.8; N = 2.
    CHECK(grpo_objective(batch, clip) == doctest::Approx(-0.8 / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("objective requires advantages") {
  auto batch = make_batch({{-1.0}, {-1.0}}, {{-1.0}, {-1.0}}, {0.0, 1.0});
  CHECK_THROWS_AS(grpo_objective(batch, ClipConfig{}), MissingAdvantages);
}

TEST_CASE("at old==new the objective is the length-weighted advantage mean") {
  testutil::Rand rng(41);
  const ClipConfig clip;
  for (int iter = 0; iter < 100; ++iter) {
    GroupBatch batch = random_batch(rng, clip);
    for (auto& rollout : batch.rollouts) rollout.new_logp = rollout.old_logp;
    compute_advantages(batch, clip);
    double expected = 0.0;
    for (size_t i = 0; i < batch.rollouts.size(); ++i) {
      expected += static_cast<double>(batch.rollouts[i].old_logp.size()) *
                  (*batch.advantages)[i];
    }
    expected /= static_cast<double>(batch.total_tokens());
    CHECK(grpo_objective(batch, clip) == doctest::Approx(expected).epsilon(1e-12));
    // And every token's gradient is A_i / N.
    const auto grads = grpo_grad_new_logp(batch, clip);
    for (size_t i = 0; i < grads.size(); ++i) {
      for (double g : grads[i]) {
        CHECK(g == doctest::Approx((*batch.advantages)[i] /
                                   static_cast<double>(batch.total_tokens()))
                       .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("clipping kills the gradient on the clipped branch") {
  const ClipConfig clip;
  const double lr = std::log(1.5);
  auto batch = make_batch({{-1.0}, {-1.0}}, {{-1.0 + lr}, {-1.0}}, {1.0, 0.0});
  batch.advantages = std::vector<double>{1.0, 0.0};
  const auto grads = grpo_grad_new_logp(batch, clip);
  CHECK(grads[0][0] == 0.0);  // 1.5 > 1.28: clipped branch active
}

TEST_CASE("gradient matches central finite differences away from boundaries") {
  testutil::Rand rng(61);
  const ClipConfig clip;
  const double h = 1e-6;
  for (int iter = 0; iter < 120; ++iter) {
    GroupBatch batch = random_batch(rng, clip);
    compute_advantages(batch, clip);
    const auto grads = grpo_grad_new_logp(batch, clip);
    // Probe a few random coordinates per batch.
    for (int probe = 0; probe < 4; ++probe) {
      const size_t i = static_cast<size_t>(rng.below(static_cast<int>(batch.rollouts.size())));
      const size_t t = static_cast<size_t>(rng.below(static_cast<int>(batch.rollouts[i].new_logp.size())));
      GroupBatch plus = batch, minus = batch;
      plus.rollouts[i].new_logp[t] += h;
      minus.rollouts[i].new_logp[t] -= h;
      const double fd =
          (grpo_objective(plus, clip) - grpo_objective(minus, clip)) / (2 * h);
      const double analytic = grads[i][t];
      if (std::abs(fd) > 1e-12 || std::abs(analytic) > 1e-12) {
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("log-prob validation rejects bad rollouts") {
  auto positive = make_batch({{0.5}, {-1.0}}, {{-1.0}, {-1.0}}, {0.0, 1.0});
  positive.advantages = std::vector<double>{1.0, -1.0};
  CHECK_THROWS_AS(grpo_objective(positive, ClipConfig{}), Error);
  auto misaligned = make_batch({{-1.0, -1.0}, {-1.0}}, {{-1.0}, {-1.0}}, {0.0, 1.0});
  misaligned.advantages = std::vector<double>{1.0, -1.0};
  CHECK_THROWS_AS(grpo_objective(misaligned, ClipConfig{}), Error);
}
