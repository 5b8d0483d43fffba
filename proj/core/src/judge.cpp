#include "tablerl/judge.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "tablerl/prompts.hpp"

namespace tablerl {

LocalRuleJudge::LocalRuleJudge(NormalizationPolicy policy) : policy_(policy) {}

namespace {

std::optional<double> parse_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char* begin = token.data();
  const char* end = begin + token.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

JudgeVerdict LocalRuleJudge::judge(const std::string& response,
                                   const std::vector<std::string>& ground_truth) {
  if (ground_truth.empty()) throw Error("judge: empty ground truth");
  const std::string haystack = normalize(response, policy_);
  const auto response_tokens = tokenize(response, policy_);

  bool all_matched = true;
  for (const auto& gold_item : ground_truth) {
    const std::string needle = normalize(gold_item, policy_);
    bool matched = false;
    if (auto gold_number = parse_number(needle)) {
      // Numeric rule: some number in the response within tolerance.
      for (const auto& token : response_tokens) {
        if (auto value = parse_number(token)) {
          if (std::abs(*value - *gold_number) < 0.01) {
            matched = true;
            break;
          }
        }
      }
    } else {
      matched = !needle.empty() && haystack.find(needle) != std::string::npos;
    }
    if (!matched) {
      all_matched = false;
      break;
    }
  }
  JudgeVerdict verdict;
  verdict.correct = all_matched;
  verdict.raw_judge_output =
      std::string("local-rule-judge: ") + (all_matched ? "correct" : "incorrect");
  return verdict;
}

std::optional<bool> parse_judgement_text(const std::string& text) {
  // Judges reply with fenced or bare JSON; take the outermost brace span.
  const size_t begin = text.find('{');
  const size_t end = text.rfind('}');
  std::string body = begin != std::string::npos && end != std::string::npos &&
                             begin < end
                         ? text.substr(begin, end - begin + 1)
                         : text;
  nlohmann::json doc =
      nlohmann::json::parse(body, /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("judgement") ||
      !doc["judgement"].is_string()) {
    return std::nullopt;
  }
  std::string judgement = doc["judgement"].get<std::string>();
  for (auto& c : judgement) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (judgement == "correct") return true;
  if (judgement == "incorrect") return false;
  return std::nullopt;
}

HttpJudgeClient::HttpJudgeClient(Options options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw JudgeUnavailable("judge base URL is empty");
  }
}

HttpJudgeClient::~HttpJudgeClient() = default;

std::unique_ptr<HttpJudgeClient> HttpJudgeClient::from_env() {
  Options options;
  if (const char* url = std::getenv("TABLERL_JUDGE_BASE_URL")) options.base_url = url;
  if (const char* model = std::getenv("TABLERL_JUDGE_MODEL")) options.model = model;
  if (const char* key = std::getenv("TABLERL_JUDGE_API_KEY")) options.api_key = key;
  if (options.base_url.empty()) {
    throw JudgeUnavailable("TABLERL_JUDGE_BASE_URL is not set");
  }
  return std::make_unique<HttpJudgeClient>(std::move(options));
}

JudgeVerdict HttpJudgeClient::judge(const std::string& response,
                                    const std::vector<std::string>& ground_truth) {
  if (ground_truth.empty()) throw Error("judge: empty ground truth");
  const std::string prompt = render_judge_prompt(response, ground_truth);
  nlohmann::json body{
      {"model", options_.model},
      {"temperature", 0.0},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", prompt}}})}};
  const std::string payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto result = client.Post(options_.path, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_error = "HTTP status " + std::to_string(result->status);
      continue;
    }
    nlohmann::json doc = nlohmann::json::parse(result->body, nullptr, false);
    if (doc.is_discarded()) {
      last_error = "response body is not JSON";
      continue;
    }
    std::string content;
    if (doc.contains("choices") && doc["choices"].is_array() &&
        !doc["choices"].empty()) {
      const auto& choice = doc["choices"].front();
      if (choice.contains("message") && choice["message"].contains("content") &&
          choice["message"]["content"].is_string()) {
        content = choice["message"]["content"].get<std::string>();
      }
    }
    if (content.empty()) {
      last_error = "completion has no message content";
      continue;
    }
    JudgeVerdict verdict;
    verdict.raw_judge_output = content;
    // Unparseable verdicts are recorded and treated as incorrect.
    verdict.correct = parse_judgement_text(content).value_or(false);
    return verdict;
  }
  throw JudgeUnavailable("judge endpoint failed after " +
                         std::to_string(options_.max_retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace tablerl
