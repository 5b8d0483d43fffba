#include "tablerl/rewards.hpp"

#include <cmath>

namespace tablerl {

void validate(const RewardConfig& config) {
  auto check_weight = [](double w, const char* name) {
    if (!std::isfinite(w) || w < 0.0) {
      throw BadConfig(std::string(name) + " must be finite and non-negative");
    }
  };
  check_weight(config.accuracy_weight, "accuracy_weight");
  check_weight(config.format_weight, "format_weight");
  check_weight(config.fftqa_bleu_weight, "fftqa_bleu_weight");
  check_weight(config.fftqa_rouge_weight, "fftqa_rouge_weight");
  if (std::abs(config.fftqa_bleu_weight + config.fftqa_rouge_weight - 1.0) >
      1e-9) {
    throw BadConfig("fftqa_bleu_weight + fftqa_rouge_weight must equal 1");
  }
  for (double r : config.format_stage_rewards) {
    if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
      throw BadConfig("format_stage_rewards entries must lie in [0,1]");
    }
  }
}

double accuracy_reward(const ParsedResponse& parsed, const GoldAnswer& gold,
                       TaskKind task, const RewardConfig& config) {
  if (!gold_matches_task(gold, task)) {
    throw GoldTaskMismatch("gold answer variant does not match task '" +
                           std::string(to_string(task)) + "'");
  }
  if (!parsed.parsed_answer) return 0.0;

  switch (task) {
    case TaskKind::tqa: {
      const auto* pred = std::get_if<ShortList>(&*parsed.parsed_answer);
      if (!pred) return 0.0;
      const auto& want = std::get<ShortList>(gold);
      return exact_match_list(pred->items, want.items, config.normalization);
    }
    case TaskKind::tfv: {
      const auto* pred = std::get_if<Label>(&*parsed.parsed_answer);
      if (!pred) return 0.0;
      return pred->value == std::get<Label>(gold).value ? 1.0 : 0.0;
    }
    case TaskKind::fftqa: {
      const auto* pred = std::get_if<Sentence>(&*parsed.parsed_answer);
      if (!pred) return 0.0;
      const auto& want = std::get<Sentence>(gold);
      // A gold sentence that normalizes away cannot anchor either metric.
      if (tokenize(want.text, config.normalization).empty()) return 0.0;
      const double b = bleu(pred->text, want.text, config.normalization);
      const double r = rouge_l(pred->text, want.text, config.normalization);
      return config.fftqa_bleu_weight * b + config.fftqa_rouge_weight * r;
    }
  }
  return 0.0;
}

RewardBreakdown total_reward(const std::string& raw_response,
                             const GoldAnswer& gold, TaskKind task,
                             const RewardConfig& config) {
  const ParsedResponse parsed = parse_response(raw_response, task);
  RewardBreakdown out;
  out.task = task;
  out.format_stage = parsed.format_stage;
  out.format = format_reward(parsed, config.format_stage_rewards);
  const bool gated = config.format_gate && parsed.format_stage < 3;
  out.accuracy = gated ? 0.0 : accuracy_reward(parsed, gold, task, config);
  out.total = config.accuracy_weight * out.accuracy +
              config.format_weight * out.format;
  return out;
}

std::vector<RewardBreakdown> batch_rewards(std::span<const std::string> responses,
                                           const TaskInstance& instance,
                                           const RewardConfig& config) {
  if (responses.empty()) throw Error("batch_rewards: empty response list");
  if (!gold_matches_task(instance.gold, instance.task)) {
    throw GoldTaskMismatch("instance '" + instance.id +
                           "': gold answer variant does not match task");
  }
  std::vector<RewardBreakdown> out;
  out.reserve(responses.size());
  for (const auto& response : responses) {
    out.push_back(total_reward(response, instance.gold, instance.task, config));
  }
  return out;
}

}  // namespace tablerl
