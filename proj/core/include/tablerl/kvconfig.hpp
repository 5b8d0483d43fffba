#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tablerl/rewards.hpp"

namespace tablerl {

// Flat `key = value` config file: one pair per line, '#' starts a comment,
// blank lines ignored. Shared by the reward engine, the toy trainer and the
// CLI.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  std::string to_string() const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
};

// Documented keys (defaults in parentheses):
//   accuracy_weight (1.0), format_weight (0.2), fftqa_bleu_weight (0.5),
//   fftqa_rouge_weight (0.5), format_gate (false),
//   format_stage_rewards (0,0.2,0.4,0.7,1.0),
//   norm_lowercase (true), norm_strip_punct_edges (true),
//   norm_collapse_whitespace (true), norm_strip_thousands_separators (true),
//   norm_order_sensitive_em (false)
RewardConfig reward_config_from_kv(const KeyValueConfig& kv);
KeyValueConfig reward_config_to_kv(const RewardConfig& config);

}  // namespace tablerl
