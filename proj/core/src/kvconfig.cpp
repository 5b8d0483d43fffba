#include "tablerl/kvconfig.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace tablerl {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw BadConfig("config line " + std::to_string(line_no) +
                      " is not 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw BadConfig("config line " + std::to_string(line_no) + " has an empty key");
    }
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(it->second, &consumed);
  } catch (const std::exception&) {
    throw BadConfig("key '" + key + "' is not a number: " + it->second);
  }
  if (consumed != it->second.size()) {
    throw BadConfig("key '" + key + "' is not a number: " + it->second);
  }
  return value;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  size_t consumed = 0;
  long value = 0;
  try {
    value = std::stol(it->second, &consumed);
  } catch (const std::exception&) {
    throw BadConfig("key '" + key + "' is not an integer: " + it->second);
  }
  if (consumed != it->second.size()) {
    throw BadConfig("key '" + key + "' is not an integer: " + it->second);
  }
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadConfig("key '" + key + "' is not a boolean: " + v);
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream in(it->second);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw BadConfig("key '" + key + "' has a non-numeric entry: " + item);
    }
  }
  return out;
}

std::string KeyValueConfig::to_string() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
  return out.str();
}

void KeyValueConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file: " + path);
  out << to_string();
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

RewardConfig reward_config_from_kv(const KeyValueConfig& kv) {
  RewardConfig config;
  config.accuracy_weight = kv.get_double("accuracy_weight", config.accuracy_weight);
  config.format_weight = kv.get_double("format_weight", config.format_weight);
  config.fftqa_bleu_weight =
      kv.get_double("fftqa_bleu_weight", config.fftqa_bleu_weight);
  config.fftqa_rouge_weight =
      kv.get_double("fftqa_rouge_weight", config.fftqa_rouge_weight);
  config.format_gate = kv.get_bool("format_gate", config.format_gate);
  const std::vector<double> stage_defaults(config.format_stage_rewards.begin(),
                                           config.format_stage_rewards.end());
  const auto stages = kv.get_double_list("format_stage_rewards", stage_defaults);
  if (stages.size() != config.format_stage_rewards.size()) {
    throw BadConfig("format_stage_rewards must have exactly 5 entries");
  }
  std::copy(stages.begin(), stages.end(), config.format_stage_rewards.begin());
  auto& n = config.normalization;
  n.lowercase = kv.get_bool("norm_lowercase", n.lowercase);
  n.strip_punct_edges = kv.get_bool("norm_strip_punct_edges", n.strip_punct_edges);
  n.collapse_whitespace =
      kv.get_bool("norm_collapse_whitespace", n.collapse_whitespace);
  n.strip_thousands_separators =
      kv.get_bool("norm_strip_thousands_separators", n.strip_thousands_separators);
  n.order_sensitive_em =
      kv.get_bool("norm_order_sensitive_em", n.order_sensitive_em);
  validate(config);
  return config;
}

KeyValueConfig reward_config_to_kv(const RewardConfig& config) {
  KeyValueConfig kv;
  kv.set("accuracy_weight", format_double(config.accuracy_weight));
  kv.set("format_weight", format_double(config.format_weight));
  kv.set("fftqa_bleu_weight", format_double(config.fftqa_bleu_weight));
  kv.set("fftqa_rouge_weight", format_double(config.fftqa_rouge_weight));
  kv.set("format_gate", config.format_gate ? "true" : "false");
  std::string stages;
  for (double r : config.format_stage_rewards) {
    if (!stages.empty()) stages += ",";
    stages += format_double(r);
  }
  kv.set("format_stage_rewards", stages);
  const auto& n = config.normalization;
  kv.set("norm_lowercase", n.lowercase ? "true" : "false");
  kv.set("norm_strip_punct_edges", n.strip_punct_edges ? "true" : "false");
  kv.set("norm_collapse_whitespace", n.collapse_whitespace ? "true" : "false");
  kv.set("norm_strip_thousands_separators",
         n.strip_thousands_separators ? "true" : "false");
  kv.set("norm_order_sensitive_em", n.order_sensitive_em ? "true" : "false");
  return kv;
}

}  // namespace tablerl
