#include "tablerl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <sstream>
#include <unordered_map>

#include "tablerl/response.hpp"

namespace tablerl {

using nlohmann::json;

nlohmann::json EvalReport::to_json() const {
  json out;
  out["tqa"] = {{"count", tqa.count},
                {"em_accuracy", tqa.em_accuracy},
                {"judge_adjusted_accuracy", tqa.judge_adjusted_accuracy}};
  out["tfv"] = {{"count", tfv.count}, {"accuracy", tfv.accuracy}};
  out["fftqa"] = {{"count", fftqa.count},
                  {"bleu", fftqa.mean_bleu},
                  {"rouge_l", fftqa.mean_rouge_l}};
  json ks = json::object();
  for (const auto& [k, value] : pass_at_k) ks[std::to_string(k)] = value;
  out["pass_at_k"] = std::move(ks);
  out["counts"] = {{"evaluated", evaluated},
                   {"skipped", skipped},
                   {"parse_failed", parse_failed}};
  out["judge"] = {{"enabled", judge_enabled},
                  {"degraded", judge_degraded},
                  {"judged", judged},
                  {"flipped", judge_flipped}};
  return out;
}

std::string EvalReport::per_instance_csv() const {
  std::ostringstream out;
  out << "id,task,format_stage,accuracy,bleu,rouge_l,em_correct,judge_flipped\n";
  out.precision(17);
  for (const auto& row : per_instance) {
    out << row.instance_id << ',' << to_string(row.task) << ','
        << row.format_stage << ',' << row.accuracy << ',' << row.bleu << ','
        << row.rouge_l << ',' << (row.em_correct ? 1 : 0) << ','
        << (row.judge_flipped ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> gold_list(const TaskInstance& instance) {
  return std::get<ShortList>(instance.gold).items;
}

// Issues judge calls with a bounded number in flight; results land by index,
// so aggregation is deterministic. JudgeUnavailable marks the whole batch
// degraded and leaves remaining verdicts unset.
struct JudgeOutcome {
  std::vector<std::optional<JudgeVerdict>> verdicts;
  bool degraded = false;
};

JudgeOutcome run_judge_batch(JudgeClient& judge,
                             const std::vector<const TaskInstance*>& instances,
                             const std::vector<const std::string*>& responses,
                             int concurrency) {
  JudgeOutcome outcome;
  outcome.verdicts.resize(instances.size());
  const size_t limit = static_cast<size_t>(std::max(concurrency, 1));
  for (size_t begin = 0; begin < instances.size() && !outcome.degraded;
       begin += limit) {
    const size_t end = std::min(begin + limit, instances.size());
    std::vector<std::future<JudgeVerdict>> inflight;
    inflight.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
      inflight.push_back(std::async(std::launch::async, [&, i] {
        return judge.judge(*responses[i], gold_list(*instances[i]));
      }));
    }
    for (size_t i = begin; i < end; ++i) {
      try {
        outcome.verdicts[i] = inflight[i - begin].get();
      } catch (const JudgeUnavailable&) {
        outcome.degraded = true;
      }
    }
  }
  return outcome;
}

}  // namespace

EvalReport evaluate(const std::vector<TaskInstance>& instances,
                    const std::vector<PredictionRecord>& predictions,
                    const EvalConfig& config, JudgeClient* judge) {
  validate(config.rewards);
  std::unordered_map<std::string, const TaskInstance*> by_id;
  for (const auto& instance : instances) by_id.emplace(instance.id, &instance);

  EvalReport report;
  report.judge_enabled = judge != nullptr;

  int tqa_em = 0, tqa_adjusted = 0, tfv_correct = 0;
  double fftqa_bleu_sum = 0.0, fftqa_rouge_sum = 0.0;

  // TQA EM failures collected for the judge pass.
  std::vector<const TaskInstance*> judge_instances;
  std::vector<const std::string*> judge_responses;
  std::vector<size_t> judge_rows;

  std::unordered_map<std::string, size_t> seen;
  for (const auto& prediction : predictions) {
    auto it = by_id.find(prediction.instance_id);
    if (it == by_id.end()) {
      throw UnknownInstance("prediction references unknown instance '" +
                            prediction.instance_id + "'");
    }
    const TaskInstance& instance = *it->second;
    const std::string& response = prediction.responses.front();
    const ParsedResponse parsed = parse_response(response, instance.task);

    PerInstanceResult row;
    row.instance_id = instance.id;
    row.task = instance.task;
    row.format_stage = parsed.format_stage;
    row.accuracy = accuracy_reward(parsed, instance.gold, instance.task,
                                   config.rewards);
    if (parsed.format_stage < 3) ++report.parse_failed;

    switch (instance.task) {
      case TaskKind::tqa: {
        row.em_correct = row.accuracy == 1.0;
        if (row.em_correct) {
          ++tqa_em;
        } else if (judge) {
          judge_instances.push_back(&instance);
          judge_responses.push_back(&response);
          judge_rows.push_back(report.per_instance.size());
        }
        ++report.tqa.count;
        break;
      }
      case TaskKind::tfv: {
        if (row.accuracy == 1.0) ++tfv_correct;
        ++report.tfv.count;
        break;
      }
      case TaskKind::fftqa: {
        if (const auto* sentence =
                parsed.parsed_answer
                    ? std::get_if<Sentence>(&*parsed.parsed_answer)
                    : nullptr) {
          const auto& gold = std::get<Sentence>(instance.gold);
          if (!tokenize(gold.text, config.rewards.normalization).empty()) {
            row.bleu = bleu(sentence->text, gold.text, config.rewards.normalization);
            row.rouge_l =
                rouge_l(sentence->text, gold.text, config.rewards.normalization);
          }
        }
        fftqa_bleu_sum += row.bleu;
        fftqa_rouge_sum += row.rouge_l;
        ++report.fftqa.count;
        break;
      }
    }
    ++report.evaluated;
    seen[prediction.instance_id] = 1;
    report.per_instance.push_back(std::move(row));
  }
  report.skipped = static_cast<int>(instances.size() - seen.size());

  tqa_adjusted = tqa_em;
  if (judge && !judge_instances.empty()) {
    JudgeOutcome outcome = run_judge_batch(*judge, judge_instances,
                                           judge_responses,
                                           config.judge_concurrency);
    report.judge_degraded = outcome.degraded;
    for (size_t i = 0; i < outcome.verdicts.size(); ++i) {
      if (!outcome.verdicts[i]) continue;
      ++report.judged;
      if (outcome.verdicts[i]->correct) {
        ++tqa_adjusted;
        ++report.judge_flipped;
        report.per_instance[judge_rows[i]].judge_flipped = true;
      }
    }
  }

  if (report.tqa.count > 0) {
    report.tqa.em_accuracy = static_cast<double>(tqa_em) / report.tqa.count;
    report.tqa.judge_adjusted_accuracy =
        static_cast<double>(tqa_adjusted) / report.tqa.count;
  }
  if (report.tfv.count > 0) {
    report.tfv.accuracy = static_cast<double>(tfv_correct) / report.tfv.count;
  }
  if (report.fftqa.count > 0) {
    report.fftqa.mean_bleu = fftqa_bleu_sum / report.fftqa.count;
    report.fftqa.mean_rouge_l = fftqa_rouge_sum / report.fftqa.count;
  }
  if (!config.pass_ks.empty()) {
    report.pass_at_k =
        pass_at_k_report(instances, predictions, config.pass_ks, config);
  }
  return report;
}

namespace {

// Binomials up to C(62,31) fit in uint64_t, so the estimator can be an
// exact rational with a single rounding. Larger n falls back to the
// log-space product.
uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  uint64_t result = 1;
  // result * (n-k+i) is always divisible by i: the division is exact.
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
  }
  return result;
}

}  // namespace

double pass_at_k(int n, int c, int k) {
  if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
    throw BadCounts("pass_at_k requires 0 <= c <= n and 1 <= k <= n (got n=" +
                    std::to_string(n) + ", c=" + std::to_string(c) +
                    ", k=" + std::to_string(k) + ")");
  }
  if (c == 0) return 0.0;
  if (n - c < k) return 1.0;  // every k-subset hits a correct sample
  if (n <= 62) {
    const double bad = static_cast<double>(binomial_u64(n - c, k));
    const double all = static_cast<double>(binomial_u64(n, k));
    return 1.0 - bad / all;
  }
  double log_ratio = 0.0;
  for (int i = 0; i < k; ++i) {
    log_ratio += std::log(static_cast<double>(n - c - i)) -
                 std::log(static_cast<double>(n - i));
  }
  return 1.0 - std::exp(log_ratio);
}

std::map<int, double> pass_at_k_report(
    const std::vector<TaskInstance>& instances,
    const std::vector<PredictionRecord>& predictions,
    const std::vector<int>& ks, const EvalConfig& config) {
  if (ks.empty()) throw Error("pass_at_k_report: no k values requested");
  std::unordered_map<std::string, const TaskInstance*> by_id;
  for (const auto& instance : instances) by_id.emplace(instance.id, &instance);

  const int max_k = *std::max_element(ks.begin(), ks.end());
  std::optional<size_t> n;
  std::vector<int> counts;  // correct per instance (TQA/TFV only)
  for (const auto& prediction : predictions) {
    auto it = by_id.find(prediction.instance_id);
    if (it == by_id.end()) {
      throw UnknownInstance("prediction references unknown instance '" +
                            prediction.instance_id + "'");
    }
    const TaskInstance& instance = *it->second;
    if (instance.task == TaskKind::fftqa) continue;  // no binary correctness
    if (!n) n = prediction.responses.size();
    if (prediction.responses.size() != *n) {
      throw InsufficientSamples("all records must carry the same sample count");
    }
    if (*n < static_cast<size_t>(max_k)) {
      throw InsufficientSamples("records carry " + std::to_string(*n) +
                                " samples, need at least " +
                                std::to_string(max_k));
    }
    int correct = 0;
    for (const auto& response : prediction.responses) {
      const ParsedResponse parsed = parse_response(response, instance.task);
      if (accuracy_reward(parsed, instance.gold, instance.task,
                          config.rewards) == 1.0) {
        ++correct;
      }
    }
    counts.push_back(correct);
  }
  if (counts.empty()) {
    throw InsufficientSamples("no TQA/TFV records to estimate pass@k from");
  }

  std::map<int, double> out;
  for (int k : ks) {
    double sum = 0.0;
    for (int c : counts) sum += pass_at_k(static_cast<int>(*n), c, k);
    out[k] = sum / static_cast<double>(counts.size());
  }
  return out;
}

}  // namespace tablerl
