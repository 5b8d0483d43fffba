#include "tablerl/toy_train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace tablerl {

void validate(const TrainConfig& config) {
  if (config.group_size < 2) throw BadConfig("group_size must be at least 2");
  if (config.groups_per_step < 1) throw BadConfig("groups_per_step must be positive");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw BadConfig("learning_rate must be positive and finite");
  }
  if (config.max_prompt_tokens < 1 || config.max_response_tokens < 1) {
    throw BadConfig("token limits must be positive");
  }
  if (!(config.sample_temperature > 0.0) || !(config.eval_temperature > 0.0)) {
    throw BadConfig("temperatures must be positive");
  }
  if (!(config.eval_top_p > 0.0) || config.eval_top_p > 1.0) {
    throw BadConfig("eval_top_p must lie in (0,1]");
  }
  if (config.total_steps < 0) throw BadConfig("total_steps must be non-negative");
  if (config.inner_epochs < 1) throw BadConfig("inner_epochs must be positive");
}

TrainConfig train_config_from_kv(const KeyValueConfig& kv) {
  TrainConfig config;
  config.group_size = static_cast<int>(kv.get_long("group_size", config.group_size));
  config.groups_per_step =
      static_cast<int>(kv.get_long("groups_per_step", config.groups_per_step));
  config.learning_rate = kv.get_double("learning_rate", config.learning_rate);
  config.max_prompt_tokens =
      static_cast<int>(kv.get_long("max_prompt_tokens", config.max_prompt_tokens));
  config.max_response_tokens = static_cast<int>(
      kv.get_long("max_response_tokens", config.max_response_tokens));
  config.sample_temperature =
      kv.get_double("sample_temperature", config.sample_temperature);
  config.eval_temperature =
      kv.get_double("eval_temperature", config.eval_temperature);
  config.eval_top_p = kv.get_double("eval_top_p", config.eval_top_p);
  config.total_steps =
      static_cast<int>(kv.get_long("total_steps", config.total_steps));
  config.seed = static_cast<uint64_t>(
      kv.get_long("seed", static_cast<long>(config.seed)));
  config.inner_epochs =
      static_cast<int>(kv.get_long("inner_epochs", config.inner_epochs));
  validate(config);
  return config;
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

KeyValueConfig train_config_to_kv(const TrainConfig& config) {
  KeyValueConfig kv;
  kv.set("group_size", std::to_string(config.group_size));
  kv.set("groups_per_step", std::to_string(config.groups_per_step));
  kv.set("learning_rate", format_double(config.learning_rate));
  kv.set("max_prompt_tokens", std::to_string(config.max_prompt_tokens));
  kv.set("max_response_tokens", std::to_string(config.max_response_tokens));
  kv.set("sample_temperature", format_double(config.sample_temperature));
  kv.set("eval_temperature", format_double(config.eval_temperature));
  kv.set("eval_top_p", format_double(config.eval_top_p));
  kv.set("total_steps", std::to_string(config.total_steps));
  kv.set("seed", std::to_string(config.seed));
  kv.set("inner_epochs", std::to_string(config.inner_epochs));
  return kv;
}

ToyCurriculum curriculum_from_kv(const KeyValueConfig& kv) {
  ToyCurriculum curriculum;
  curriculum.pool_size = static_cast<int>(
      kv.get_long("curriculum_pool_size", curriculum.pool_size));
  curriculum.pool_seed = static_cast<uint64_t>(
      kv.get_long("curriculum_pool_seed", static_cast<long>(curriculum.pool_seed)));
  curriculum.distinct_golds =
      kv.get_bool("curriculum_distinct_golds", curriculum.distinct_golds);
  curriculum.max_gold_chars = static_cast<int>(
      kv.get_long("curriculum_max_gold_chars", curriculum.max_gold_chars));
  const std::vector<double> mix_defaults(curriculum.mix.weights.begin(),
                                         curriculum.mix.weights.end());
  const auto mix = kv.get_double_list("curriculum_mix", mix_defaults);
  if (mix.size() != curriculum.mix.weights.size()) {
    throw BadConfig("curriculum_mix must have exactly 5 weights");
  }
  std::copy(mix.begin(), mix.end(), curriculum.mix.weights.begin());
  if (curriculum.pool_size < 1) throw BadConfig("curriculum_pool_size must be positive");
  return curriculum;
}

nlohmann::json to_json(const StepStats& stats) {
  return nlohmann::json{{"step", stats.step},
                        {"mean_reward", stats.mean_reward},
                        {"mean_accuracy", stats.mean_accuracy},
                        {"mean_format", stats.mean_format},
                        {"mean_response_len", stats.mean_response_len},
                        {"objective", stats.objective},
                        {"groups_skipped", stats.groups_skipped}};
}

namespace {

struct SampledGroup {
  std::vector<int> prompt_ids;
  std::vector<ToyRollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> advantages;
  bool active = false;  // false when degenerate under skip_group
};

}  // namespace

StepStats train_step(TinyPolicy& policy, std::span<const TinyTabTask> prompts,
                     const TrainConfig& train, const RewardConfig& rewards,
                     const ClipConfig& clip, uint64_t step_seed) {
  validate(train);
  validate(rewards);
  if (prompts.empty()) throw Error("train_step: no prompts");

  StepStats stats;
  std::vector<SampledGroup> groups(prompts.size());
  size_t total_rollouts = 0;

  for (size_t j = 0; j < prompts.size(); ++j) {
    SampledGroup& group = groups[j];
    const std::string prompt_text = policy_prompt(
        prompts[j], static_cast<size_t>(train.max_prompt_tokens));
    group.prompt_ids = TinyPolicy::prompt_char_ids(
        prompt_text, static_cast<size_t>(train.max_prompt_tokens));
    group.rollouts = sample_rollouts(policy, group.prompt_ids, train.group_size,
                                     train.sample_temperature, /*top_p=*/1.0,
                                     train.max_response_tokens,
                                     mix_seed(step_seed, j));

    std::vector<std::string> texts;
    texts.reserve(group.rollouts.size());
    for (const auto& rollout : group.rollouts) texts.push_back(rollout.text);
    const auto breakdowns = batch_rewards(texts, prompts[j].instance, rewards);
    group.rewards.reserve(breakdowns.size());
    for (size_t g = 0; g < breakdowns.size(); ++g) {
      group.rewards.push_back(breakdowns[g].total);
      stats.mean_reward += breakdowns[g].total;
      stats.mean_accuracy += breakdowns[g].accuracy;
      stats.mean_format += breakdowns[g].format;
      stats.mean_response_len +=
          static_cast<double>(group.rollouts[g].tokens.size());
      ++total_rollouts;
    }

    try {
      group.advantages = group_advantages(group.rewards, clip);
      group.active = true;
    } catch (const DegenerateGroup&) {
      ++stats.groups_skipped;  // skip_group mode: drop the group entirely
    }
  }

  if (total_rollouts > 0) {
    stats.mean_reward /= static_cast<double>(total_rollouts);
    stats.mean_accuracy /= static_cast<double>(total_rollouts);
    stats.mean_format /= static_cast<double>(total_rollouts);
    stats.mean_response_len /= static_cast<double>(total_rollouts);
  }

  size_t active_groups = 0;
  for (const auto& group : groups) active_groups += group.active;
  if (active_groups == 0) return stats;

  std::vector<double> grad(policy.param_count());
  for (int epoch = 0; epoch < train.inner_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective_sum = 0.0;
    for (const auto& group : groups) {
      if (!group.active) continue;
      GroupBatch batch;
      batch.rewards = group.rewards;
      batch.advantages = group.advantages;
      batch.rollouts.reserve(group.rollouts.size());
      for (const auto& rollout : group.rollouts) {
        RolloutLogProbs lp;
        lp.old_logp = rollout.logp;
        // First epoch: the policy is unchanged since sampling, so the
        // recomputed log-probs equal the recorded ones and all ratios are 1.
        lp.new_logp = policy.score_sequence(group.prompt_ids, rollout.tokens,
                                            train.sample_temperature,
                                            /*top_p=*/1.0);
        batch.rollouts.push_back(std::move(lp));
      }
      objective_sum += grpo_objective(batch, clip);
      const auto token_grads = grpo_grad_new_logp(batch, clip);
      for (size_t g = 0; g < group.rollouts.size(); ++g) {
        policy.accumulate_grad(group.prompt_ids, group.rollouts[g].tokens,
                               token_grads[g], train.sample_temperature, grad);
      }
    }
    if (epoch == 0) {
      stats.objective = objective_sum / static_cast<double>(active_groups);
    }
    // Ascent on the group-averaged objective.
    const double scale = train.learning_rate / static_cast<double>(active_groups);
    auto params = policy.params();
    for (size_t i = 0; i < params.size(); ++i) params[i] += scale * grad[i];
  }
  return stats;
}

ToyEvalResult evaluate_policy(const TinyPolicy& policy,
                              std::span<const TinyTabTask> tasks,
                              const TrainConfig& train,
                              const RewardConfig& rewards, uint64_t seed) {
  validate(train);
  if (tasks.empty()) throw Error("evaluate_policy: empty task set");
  ToyEvalResult result;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const std::string prompt_text =
        policy_prompt(tasks[i], static_cast<size_t>(train.max_prompt_tokens));
    const auto prompt_ids = TinyPolicy::prompt_char_ids(
        prompt_text, static_cast<size_t>(train.max_prompt_tokens));
    const ToyRollout rollout =
        policy.sample(prompt_ids, train.eval_temperature, train.eval_top_p,
                      train.max_response_tokens, mix_seed(seed, i));
    const ParsedResponse parsed =
        parse_response(rollout.text, tasks[i].instance.task);
    result.mean_accuracy += accuracy_reward(parsed, tasks[i].instance.gold,
                                            tasks[i].instance.task, rewards);
    ++result.count;
  }
  result.mean_accuracy /= static_cast<double>(result.count);
  return result;
}

namespace {

std::string gold_key(const TaskInstance& instance) {
  if (const auto* list = std::get_if<ShortList>(&instance.gold)) {
    std::string key;
    for (const auto& item : list->items) {
      key += item;
      key.push_back('\x1f');
    }
    return key;
  }
  if (const auto* label = std::get_if<Label>(&instance.gold)) {
    return to_string(label->value);
  }
  return std::get<Sentence>(instance.gold).text;
}

}  // namespace

std::vector<TinyTabTask> build_task_pool(const ToyCurriculum& curriculum) {
  if (curriculum.pool_size < 1) {
    throw BadConfig("curriculum pool_size must be positive");
  }
  std::vector<TinyTabTask> pool;
  pool.reserve(static_cast<size_t>(curriculum.pool_size));
  std::set<std::string> seen;
  uint64_t stream = 0;
  while (pool.size() < static_cast<size_t>(curriculum.pool_size)) {
    if (stream > 4096ULL * static_cast<uint64_t>(curriculum.pool_size)) {
      throw Error("cannot fill the pool under the curriculum filters");
    }
    TinyTabTask task =
        generate_task(mix_seed(curriculum.pool_seed, stream++), curriculum.mix);
    if (curriculum.max_gold_chars > 0) {
      const auto* list = std::get_if<ShortList>(&task.instance.gold);
      if (list) {
        bool too_long = false;
        for (const auto& item : list->items) {
          too_long |= item.size() > static_cast<size_t>(curriculum.max_gold_chars);
        }
        if (too_long) continue;
      }
    }
    if (curriculum.distinct_golds && !seen.insert(gold_key(task.instance)).second) {
      continue;
    }
    pool.push_back(std::move(task));
  }
  return pool;
}

ToyTrainResult train_toy(TinyPolicy& policy, const ToyTrainOptions& options,
                         const std::function<void(const StepStats&)>& on_step) {
  validate(options.train);
  validate(options.rewards);
  std::vector<TinyTabTask> pool = build_task_pool(options.curriculum);

  std::ofstream curve_out;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    const auto dir = std::filesystem::path(options.out_dir);
    curve_out.open(dir / "learning_curve.jsonl");
    if (!curve_out) throw IoError("cannot write learning curve in " + options.out_dir);

    KeyValueConfig run_config = train_config_to_kv(options.train);
    const KeyValueConfig reward_kv = reward_config_to_kv(options.rewards);
    for (const auto& [key, value] : reward_kv.entries()) {
      run_config.set(key, value);
    }
    run_config.set("curriculum_pool_size",
                   std::to_string(options.curriculum.pool_size));
    run_config.set("curriculum_pool_seed",
                   std::to_string(options.curriculum.pool_seed));
    run_config.set("curriculum_distinct_golds",
                   options.curriculum.distinct_golds ? "true" : "false");
    run_config.set("curriculum_max_gold_chars",
                   std::to_string(options.curriculum.max_gold_chars));
    std::string mix;
    for (double w : options.curriculum.mix.weights) {
      if (!mix.empty()) mix += ",";
      mix += format_double(w);
    }
    run_config.set("curriculum_mix", mix);
    run_config.set("clip_eps_low", format_double(options.clip.eps_low));
    run_config.set("clip_eps_high", format_double(options.clip.eps_high));
    run_config.save((dir / "run_config.cfg").string());

    std::ofstream seeds(dir / "seeds.txt");
    seeds << "train_seed = " << options.train.seed << "\n"
          << "pool_seed = " << options.curriculum.pool_seed << "\n";
  }

  ToyTrainResult result;
  result.curve.reserve(static_cast<size_t>(options.train.total_steps));
  std::vector<TinyTabTask> batch;
  for (int step = 0; step < options.train.total_steps; ++step) {
    batch.clear();
    for (int j = 0; j < options.train.groups_per_step; ++j) {
      const size_t index =
          (static_cast<size_t>(step) * options.train.groups_per_step + j) %
          pool.size();
      batch.push_back(pool[index]);
    }
    StepStats stats =
        train_step(policy, batch, options.train, options.rewards, options.clip,
                   mix_seed(options.train.seed, static_cast<uint64_t>(step)));
    stats.step = step;
    if (curve_out.is_open()) curve_out << to_json(stats).dump() << "\n";
    if (on_step) on_step(stats);
    result.curve.push_back(stats);
  }

  result.final_eval = evaluate_policy(policy, pool, options.train,
                                      options.rewards,
                                      mix_seed(options.train.seed, 0xe7a1ULL));
  return result;
}

}  // namespace tablerl
