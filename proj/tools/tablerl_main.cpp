// tablerl command line: score rollouts, evaluate predictions, estimate
// pass@k, train the toy policy, render prompts, serve the reward API.
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tablerl/dataset.hpp"
#include "tablerl/eval.hpp"
#include "tablerl/kvconfig.hpp"
#include "tablerl/prompts.hpp"
#include "tablerl/service.hpp"
#include "tablerl/toy_train.hpp"
#include "tablerl/version.hpp"

using namespace tablerl;
using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

KeyValueConfig load_kv(const std::string& path) {
  return path.empty() ? KeyValueConfig() : KeyValueConfig::from_file(path);
}

std::vector<int> parse_ks(const std::string& spec) {
  std::vector<int> ks;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) ks.push_back(std::stoi(item));
  }
  return ks;
}

int run_score(const std::string& dataset_path, const std::string& rollouts_path,
              const std::string& config_path, const std::string& out_path) {
  const RewardConfig config = reward_config_from_kv(load_kv(config_path));
  const auto instances = ingest_dataset(dataset_path);
  const auto predictions = ingest_predictions(rollouts_path);

  std::unordered_map<std::string, const TaskInstance*> by_id;
  for (const auto& instance : instances) by_id.emplace(instance.id, &instance);

  // Score everything before writing: errors must not leave partial output.
  std::vector<json> records;
  for (const auto& prediction : predictions) {
    auto it = by_id.find(prediction.instance_id);
    if (it == by_id.end()) {
      throw UnknownInstance("prediction references unknown instance '" +
                            prediction.instance_id + "'");
    }
    const auto breakdowns = batch_rewards(prediction.responses, *it->second, config);
    for (size_t i = 0; i < breakdowns.size(); ++i) {
      const auto& b = breakdowns[i];
      records.push_back(json{{"id", prediction.instance_id},
                             {"index", i},
                             {"task", to_string(b.task)},
                             {"accuracy", b.accuracy},
                             {"format", b.format},
                             {"format_stage", b.format_stage},
                             {"total", b.total}});
    }
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("cannot write " + out_path);
    out = &file;
  }
  for (const auto& record : records) *out << record.dump() << "\n";
  return 0;
}

int run_eval(const std::string& dataset_path, const std::string& predictions_path,
             const std::string& config_path, const std::string& out_path,
             const std::string& csv_path, const std::string& judge_mode,
             const std::string& ks_spec) {
  EvalConfig config;
  config.rewards = reward_config_from_kv(load_kv(config_path));
  config.pass_ks = parse_ks(ks_spec);

  const auto instances = ingest_dataset(dataset_path);
  const auto predictions = ingest_predictions(predictions_path);

  std::unique_ptr<JudgeClient> judge;
  if (judge_mode == "local") {
    judge = std::make_unique<LocalRuleJudge>(config.rewards.normalization);
  } else if (judge_mode == "remote") {
    judge = HttpJudgeClient::from_env();
  } else if (judge_mode != "none") {
    throw Error("unknown judge mode '" + judge_mode + "'");
  }

  const EvalReport report = evaluate(instances, predictions, config, judge.get());
  const std::string body = report.to_json().dump(2);
  if (out_path.empty()) {
    std::cout << body << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << body << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path);
    csv << report.per_instance_csv();
  }
  return 0;
}

int run_passk(const std::string& counts_path, int n, const std::string& ks_spec) {
  std::ifstream in(counts_path);
  if (!in) throw IoError("cannot open counts file: " + counts_path);
  std::vector<int> counts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      counts.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw Error("counts file line " + std::to_string(line_no) +
                  " is not an integer: " + line);
    }
  }
  if (counts.empty()) throw Error("counts file is empty");
  json out = json::object();
  for (int k : parse_ks(ks_spec)) {
    double sum = 0.0;
    for (int c : counts) sum += pass_at_k(n, c, k);
    out[std::to_string(k)] = sum / static_cast<double>(counts.size());
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_train_toy(const std::string& config_path, const std::string& out_dir,
                  long seed_override, long steps_override, bool quiet) {
  const KeyValueConfig kv = load_kv(config_path);
  ToyTrainOptions options;
  options.train = train_config_from_kv(kv);
  options.rewards = reward_config_from_kv(kv);
  options.curriculum = curriculum_from_kv(kv);
  options.clip.eps_low = kv.get_double("clip_eps_low", options.clip.eps_low);
  options.clip.eps_high = kv.get_double("clip_eps_high", options.clip.eps_high);
  if (seed_override >= 0) options.train.seed = static_cast<uint64_t>(seed_override);
  if (steps_override >= 0) options.train.total_steps = static_cast<int>(steps_override);
  options.out_dir = out_dir;
  const std::string init = kv.get_string("policy_init", "template_primed");
  if (init == "random") {
    options.init = ToyInit::random;
  } else if (init != "template_primed") {
    throw BadConfig("policy_init must be 'random' or 'template_primed'");
  }

  TinyPolicy policy(ToyPolicyDims{}, mix_seed(options.train.seed, 0x90110ULL),
                    options.init);
  const auto started = std::chrono::steady_clock::now();
  const auto result = train_toy(policy, options, [&](const StepStats& stats) {
    if (!quiet && (stats.step + 1) % 50 == 0) {
      std::cerr << "step " << stats.step + 1 << "  reward " << stats.mean_reward
                << "  accuracy " << stats.mean_accuracy << "  length "
                << stats.mean_response_len << "\n";
    }
  });
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started)
                             .count();
  json summary{{"steps", options.train.total_steps},
               {"seconds", seconds},
               {"final_eval_accuracy", result.final_eval.mean_accuracy},
               {"eval_tasks", result.final_eval.count}};
  if (!result.curve.empty()) {
    summary["final_step"] = to_json(result.curve.back());
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_render(const std::string& dataset_path, int index,
               const std::string& format, bool include_system,
               const std::string& out_path, bool as_messages) {
  const auto instances = ingest_dataset(dataset_path);
  if (index < 0 || static_cast<size_t>(index) >= instances.size()) {
    throw Error("instance index " + std::to_string(index) + " out of range (" +
                std::to_string(instances.size()) + " instances)");
  }
  const TableFormat table_format = table_format_from_string(format);
  std::string body;
  if (as_messages) {
    json messages = json::array();
    for (const auto& m :
         render_prompt_messages(instances[static_cast<size_t>(index)],
                                table_format, include_system)) {
      messages.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    body = messages.dump(2) + "\n";
  } else {
    if (include_system) body = system_prompt() + "\n\n";
    body += render_prompt(instances[static_cast<size_t>(index)], table_format);
  }
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << body;
  }
  return 0;
}

int run_serve(const std::string& host, int port, const std::string& config_path) {
  RewardService service(reward_config_from_kv(load_kv(config_path)));
  service.start(host, port);
  std::cerr << "serving rewards on " << host << ":" << service.port()
            << " (" << kEngineVersion << ")\n";
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop && service.running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward engineering and evaluation toolkit for table-reasoning RLVR"};
  app.set_version_flag("--version", std::string(kEngineVersion));
  app.require_subcommand(1);

  std::string dataset, rollouts, config, out, csv, judge = "none", ks = "1";
  std::string counts, host = "127.0.0.1", format = "markdown", out_dir;
  int n = 0, port = 8080, index = 0;
  long seed = -1, steps = -1;
  bool include_system = false, as_messages = false, quiet = false;

  auto* score = app.add_subcommand("score", "Score rollouts against a dataset");
  score->add_option("--dataset", dataset, "Dataset JSONL")->required();
  score->add_option("--rollouts", rollouts, "Predictions JSONL")->required();
  score->add_option("--config", config, "Flat key-value reward config");
  score->add_option("--out", out, "Output rewards JSONL (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predictions");
  eval_cmd->add_option("--dataset", dataset, "Dataset JSONL")->required();
  eval_cmd->add_option("--predictions", rollouts, "Predictions JSONL")->required();
  eval_cmd->add_option("--config", config, "Flat key-value reward config");
  eval_cmd->add_option("--out", out, "Report JSON path (default stdout)");
  eval_cmd->add_option("--csv", csv, "Optional per-instance CSV path");
  eval_cmd->add_option("--judge", judge, "Judge: none|local|remote (default none)");
  eval_cmd->add_option("--ks", ks, "pass@k values, comma separated (default 1)");

  auto* passk = app.add_subcommand("passk", "Unbiased pass@k from counts");
  passk->add_option("--counts", counts, "File with one correct-count per line")
      ->required();
  passk->add_option("--n", n, "Samples per instance")->required();
  passk->add_option("--ks", ks, "k values, comma separated (default 1)");

  auto* train = app.add_subcommand("train-toy", "Train the toy policy with GRPO");
  train->add_option("--config", config, "Flat key-value train/reward config");
  train->add_option("--out-dir", out_dir, "Run directory for curves and seeds");
  train->add_option("--seed", seed, "Seed override");
  train->add_option("--steps", steps, "Step count override");
  train->add_flag("--quiet", quiet, "Suppress progress lines");

  auto* render = app.add_subcommand("render", "Render the prompt for an instance");
  render->add_option("--dataset", dataset, "Dataset JSONL")->required();
  render->add_option("--index", index, "Instance index (default 0)");
  render->add_option("--format", format, "markdown|html (default markdown)");
  render->add_flag("--include-system", include_system, "Prepend the system prompt");
  render->add_flag("--messages", as_messages, "Emit chat messages as JSON");
  render->add_option("--out", out, "Output path (default stdout)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP reward service");
  serve->add_option("--host", host, "Bind host (default 127.0.0.1)");
  serve->add_option("--port", port, "Bind port (default 8080)");
  serve->add_option("--config", config, "Flat key-value reward config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (score->parsed()) return run_score(dataset, rollouts, config, out);
    if (eval_cmd->parsed())
      return run_eval(dataset, rollouts, config, out, csv, judge, ks);
    if (passk->parsed()) return run_passk(counts, n, ks);
    if (train->parsed()) return run_train_toy(config, out_dir, seed, steps, quiet);
    if (render->parsed())
      return run_render(dataset, index, format, include_system, out, as_messages);
    if (serve->parsed()) return run_serve(host, port, config);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
