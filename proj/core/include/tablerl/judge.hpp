#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tablerl/errors.hpp"
#include "tablerl/text_metrics.hpp"

namespace tablerl {

struct JudgeVerdict {
  bool correct = false;
  std::string raw_judge_output;
};

// Re-scores a short-answer response against the gold list with relaxed
// matching rules. Implementations throw JudgeUnavailable when they cannot
// produce a verdict at all (network down, etc.); unparseable judge output is
// a verdict of incorrect, not an error.
class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual JudgeVerdict judge(const std::string& response,
                             const std::vector<std::string>& ground_truth) = 0;
};

// Deterministic local fallback applying the judge rules mechanically:
// normalized containment for phrases, absolute numeric tolerance < 0.01,
// every gold item matched, order-insensitive. Strictly more conservative
// than an LLM judge (no semantic paraphrase matching).
class LocalRuleJudge : public JudgeClient {
 public:
  explicit LocalRuleJudge(NormalizationPolicy policy = {});
  JudgeVerdict judge(const std::string& response,
                     const std::vector<std::string>& ground_truth) override;

 private:
  NormalizationPolicy policy_;
};

// Remote adapter posting the judge prompt to a chat-completion-style HTTP
// endpoint and parsing the {"judgement": ...} verdict.
class HttpJudgeClient : public JudgeClient {
 public:
  struct Options {
    std::string base_url;  // e.g. "http://127.0.0.1:8080"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;   // empty -> no Authorization header
    int max_retries = 2;
    int timeout_seconds = 30;
  };

  explicit HttpJudgeClient(Options options);
  ~HttpJudgeClient() override;

  // Reads TABLERL_JUDGE_BASE_URL, TABLERL_JUDGE_MODEL, TABLERL_JUDGE_API_KEY.
  // Throws JudgeUnavailable when the base URL is unset.
  static std::unique_ptr<HttpJudgeClient> from_env();

  JudgeVerdict judge(const std::string& response,
                     const std::vector<std::string>& ground_truth) override;

 private:
  Options options_;
};

// Parses a judge completion body: fenced or bare {"judgement": "correct"}.
// nullopt when the text holds no recognizable verdict.
std::optional<bool> parse_judgement_text(const std::string& text);

}  // namespace tablerl
