#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablerl/dataset.hpp"
#include "tablerl/judge.hpp"
#include "tablerl/rewards.hpp"

namespace tablerl {

struct EvalConfig {
  RewardConfig rewards;
  // pass@k values to estimate during evaluate(); empty disables the table.
  std::vector<int> pass_ks;
  // Bounded in-flight remote judge calls.
  int judge_concurrency = 4;
};

struct TaskMetrics {
  int count = 0;
  double em_accuracy = 0.0;
  double judge_adjusted_accuracy = 0.0;  // TQA only
  double accuracy = 0.0;                 // TFV only
  double mean_bleu = 0.0;                // FF-TQA only
  double mean_rouge_l = 0.0;             // FF-TQA only
};

struct PerInstanceResult {
  std::string instance_id;
  TaskKind task = TaskKind::tqa;
  int format_stage = 0;
  double accuracy = 0.0;
  double bleu = 0.0;
  double rouge_l = 0.0;
  bool em_correct = false;
  bool judge_flipped = false;
};

struct EvalReport {
  TaskMetrics tqa;
  TaskMetrics tfv;
  TaskMetrics fftqa;
  std::map<int, double> pass_at_k;
  int evaluated = 0;
  int skipped = 0;       // instances with no prediction record
  int parse_failed = 0;  // first responses below stage 3
  bool judge_enabled = false;
  bool judge_degraded = false;  // judge became unavailable mid-run
  int judged = 0;
  int judge_flipped = 0;
  std::vector<PerInstanceResult> per_instance;

  nlohmann::json to_json() const;
  std::string per_instance_csv() const;
};

// Scores the first response of each prediction record for the headline
// metrics. TQA EM failures are re-scored by `judge` when provided; a judge
// "correct" raises judge-adjusted accuracy only, raw EM stays untouched. A
// JudgeUnavailable mid-run degrades to EM-only and sets judge_degraded.
// Throws UnknownInstance for predictions whose id is not in `instances`.
EvalReport evaluate(const std::vector<TaskInstance>& instances,
                    const std::vector<PredictionRecord>& predictions,
                    const EvalConfig& config, JudgeClient* judge = nullptr);

// Unbiased pass@k estimator 1 - C(n-c,k)/C(n,k) from n samples with c
// correct. Exact for n <= 62 (integer binomials, one rounding); stable
// log-space product beyond. Throws BadCounts unless 0 <= c <= n, 1 <= k <= n.
double pass_at_k(int n, int c, int k);

// Mean pass@k over TQA/TFV instances; every record must carry the same
// n >= max(ks) samples. Correctness = accuracy_reward == 1.
std::map<int, double> pass_at_k_report(
    const std::vector<TaskInstance>& instances,
    const std::vector<PredictionRecord>& predictions,
    const std::vector<int>& ks, const EvalConfig& config);

}  // namespace tablerl
