#include "tablerl/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace tablerl {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string apply_lowercase(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Strips leading/trailing punctuation from each whitespace-delimited token,
// preserving the whitespace itself so the flag stays independent of
// collapse_whitespace.
std::string apply_strip_punct_edges(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      out.push_back(s[i]);
      ++i;
      continue;
    }
    size_t end = i;
    while (end < s.size() && !is_space(s[end])) ++end;
    size_t begin = i;
    size_t last = end;
    while (begin < last && is_punct(s[begin])) ++begin;
    while (last > begin && is_punct(s[last - 1])) --last;
    out.append(s, begin, last - begin);
    i = end;
  }
  return out;
}

std::string apply_strip_thousands(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && !out.empty() && is_digit(out.back()) &&
        i + 1 < s.size() && is_digit(s[i + 1])) {
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string apply_collapse_trim(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string normalize(const std::string& text,
                      const NormalizationPolicy& policy) {
  std::string out = text;
  if (policy.lowercase) out = apply_lowercase(out);
  if (policy.strip_punct_edges) out = apply_strip_punct_edges(out);
  if (policy.strip_thousands_separators) out = apply_strip_thousands(out);
  if (policy.collapse_whitespace) out = apply_collapse_trim(out);
  return out;
}

std::vector<std::string> tokenize(const std::string& text,
                                  const NormalizationPolicy& policy) {
  std::vector<std::string> tokens;
  std::istringstream in(normalize(text, policy));
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

int exact_match_list(std::span<const std::string> pred,
                     std::span<const std::string> gold,
                     const NormalizationPolicy& policy) {
  if (gold.empty()) throw Error("exact_match_list: gold list is empty");
  if (pred.size() != gold.size()) return 0;
  std::vector<std::string> p, g;
  p.reserve(pred.size());
  g.reserve(gold.size());
  for (const auto& s : pred) p.push_back(normalize(s, policy));
  for (const auto& s : gold) g.push_back(normalize(s, policy));
  if (!policy.order_sensitive_em) {
    std::sort(p.begin(), p.end());
    std::sort(g.begin(), g.end());
  }
  return p == g ? 1 : 0;
}

size_t lcs_length(std::span<const std::string> a,
                  std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);  // b is the shorter side
  if (b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                     : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

double rouge_l(const std::string& candidate, const std::string& reference,
               const NormalizationPolicy& policy) {
  const auto ref = tokenize(reference, policy);
  if (ref.empty()) throw EmptyReference("rouge_l: reference is empty after normalization");
  const auto cand = tokenize(candidate, policy);
  const size_t lcs = lcs_length(cand, ref);
  if (lcs == 0) return 0.0;
  const double precision = static_cast<double>(lcs) / static_cast<double>(cand.size());
  const double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + static_cast<long>(i),
                                  tokens.begin() + static_cast<long>(i + n));
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

double bleu(const std::string& candidate, const std::string& reference,
            const NormalizationPolicy& policy, int max_n) {
  const auto ref = tokenize(reference, policy);
  if (ref.empty()) throw EmptyReference("bleu: reference is empty after normalization");
  const auto cand = tokenize(candidate, policy);
  if (cand.empty()) return 0.0;

  // Geometric mean of modified n-gram precisions over the orders the
  // candidate actually has.
  const size_t orders = std::min<size_t>(static_cast<size_t>(std::max(max_n, 1)),
                                         cand.size());
  double log_sum = 0.0;
  size_t zero_orders_seen = 0;
  for (size_t n = 1; n <= orders; ++n) {
    const auto cand_grams = count_ngrams(cand, n);
    const auto ref_grams = count_ngrams(ref, n);
    size_t total = 0, clipped = 0;
    for (const auto& [gram, count] : cand_grams) {
      total += count;
      auto it = ref_grams.find(gram);
      if (it != ref_grams.end()) clipped += std::min(count, it->second);
    }
    double precision;
    if (clipped > 0) {
      precision = static_cast<double>(clipped) / static_cast<double>(total);
    } else {
      precision = 1.0 / (std::exp2(static_cast<double>(zero_orders_seen)) *
                         static_cast<double>(total));
      ++zero_orders_seen;
    }
    log_sum += std::log(precision);
  }
  const double geo_mean = std::exp(log_sum / static_cast<double>(orders));

  const double brevity =
      cand.size() < ref.size()
          ? std::exp(1.0 - static_cast<double>(ref.size()) /
                               static_cast<double>(cand.size()))
          : 1.0;
  return std::min(1.0, geo_mean * brevity);
}

}  // namespace tablerl
