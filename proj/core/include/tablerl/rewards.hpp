#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tablerl/response.hpp"
#include "tablerl/table.hpp"
#include "tablerl/text_metrics.hpp"

namespace tablerl {

struct RewardConfig {
  double accuracy_weight = 1.0;
  double format_weight = 0.2;
  // FF-TQA accuracy blends BLEU and ROUGE-L; the pair must sum to 1.
  double fftqa_bleu_weight = 0.5;
  double fftqa_rouge_weight = 0.5;
  NormalizationPolicy normalization;
  // When true, accuracy is counted only for responses with format_stage >= 3.
  bool format_gate = false;
  std::array<double, 5> format_stage_rewards = kDefaultFormatStageRewards;
};

// Throws BadConfig on non-finite/negative weights or a blend that does not
// sum to 1.
void validate(const RewardConfig& config);

struct RewardBreakdown {
  double accuracy = 0.0;
  double format = 0.0;
  double total = 0.0;
  TaskKind task = TaskKind::tqa;
  int format_stage = 0;
  bool operator==(const RewardBreakdown&) const = default;
};

// Task-specific accuracy in [0,1]: exact match for TQA, label match for TFV,
// blended BLEU/ROUGE-L for FF-TQA. Absent or ill-typed answers score 0.
// Throws GoldTaskMismatch when the gold variant does not fit the task.
double accuracy_reward(const ParsedResponse& parsed, const GoldAnswer& gold,
                       TaskKind task, const RewardConfig& config);

// Parses `raw_response`, scores both components, and combines them as
// accuracy_weight * accuracy + format_weight * format.
RewardBreakdown total_reward(const std::string& raw_response,
                             const GoldAnswer& gold, TaskKind task,
                             const RewardConfig& config);

// Element-wise total_reward; output order matches input order.
std::vector<RewardBreakdown> batch_rewards(std::span<const std::string> responses,
                                           const TaskInstance& instance,
                                           const RewardConfig& config);

}  // namespace tablerl
