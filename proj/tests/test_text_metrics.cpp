#include <doctest.h>

#include <cmath>
#include <map>

#include "tablerl/text_metrics.hpp"
#include "test_util.hpp"

using namespace tablerl;

namespace {

const NormalizationPolicy kDefault{};

// Independent textbook LCS (recursive, memoized) used as the oracle.
int lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b,
               size_t i, size_t j, std::map<std::pair<size_t, size_t>, int>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  const auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  int result;
  if (a[i] == b[j]) {
    result = 1 + lcs_oracle(a, b, i + 1, j + 1, memo);
  } else {
    result = std::max(lcs_oracle(a, b, i + 1, j, memo),
                      lcs_oracle(a, b, i, j + 1, memo));
  }
  memo[key] = result;
  return result;
}

int lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<size_t, size_t>, int> memo;
  return lcs_oracle(a, b, 0, 0, memo);
}

std::vector<std::string> random_tokens(testutil::Rand& rng, int max_len) {
  const char* words[] = {"a", "b", "c", "d", "e"};
  std::vector<std::string> out;
  for (int i = rng.below(max_len + 1); i > 0; --i) out.emplace_back(words[rng.below(5)]);
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("normalize applies the documented pipeline") {
  CHECK(normalize(" The Cat. ", kDefault) == "the cat");
  CHECK(normalize("1,234", kDefault) == "1234");
  CHECK(normalize("", kDefault) == "");
  CHECK(normalize("  a   b  ", kDefault) == "a b");
  CHECK(normalize("(hello)", kDefault) == "hello");
  CHECK(normalize("12,34,56", kDefault) == "123456");
}

TEST_CASE("normalize flags act independently") {
  NormalizationPolicy only_lower;
  only_lower.strip_punct_edges = false;
  only_lower.collapse_whitespace = false;
  only_lower.strip_thousands_separators = false;
  CHECK(normalize(" A,B. ", only_lower) == " a,b. ");

  NormalizationPolicy none;
  none.lowercase = false;
  none.strip_punct_edges = false;
  none.collapse_whitespace = false;
  none.strip_thousands_separators = false;
  CHECK(normalize(" A,B. ", none) == " A,B. ");
}

TEST_CASE("normalize is idempotent") {
  testutil::Rand rng(3);
  const std::string alphabet = "aB !,.19(){}\t-";
  for (int iter = 0; iter < 2000; ++iter) {
    std::string s;
    for (int i = rng.below(24); i > 0; --i) s.push_back(alphabet[static_cast<size_t>(rng.below(static_cast<int>(alphabet.size())))]);
    const std::string once = normalize(s, kDefault);
    CHECK(normalize(once, kDefault) == once);
  }
}

TEST_CASE("exact match compares normalized multisets") {
  CHECK(exact_match_list(std::vector<std::string>{"Beijing"},
                         std::vector<std::string>{"beijing"}, kDefault) == 1);
  CHECK(exact_match_list(std::vector<std::string>{"2", "4"},
                         std::vector<std::string>{"4", "2"}, kDefault) == 1);
  CHECK(exact_match_list(std::vector<std::string>{"2"},
                         std::vector<std::string>{"2", "4"}, kDefault) == 0);
  NormalizationPolicy ordered = kDefault;
  ordered.order_sensitive_em = true;
  CHECK(exact_match_list(std::vector<std::string>{"2", "4"},
                         std::vector<std::string>{"4", "2"}, ordered) == 0);
  CHECK(exact_match_list(std::vector<std::string>{"4", "2"},
                         std::vector<std::string>{"4", "2"}, ordered) == 1);
}

TEST_CASE("exact match is symmetric for list pairs") {
  testutil::Rand rng(11);
  for (int iter = 0; iter < 500; ++iter) {
    auto a = random_tokens(rng, 3);
    auto b = random_tokens(rng, 3);
    if (a.empty() || b.empty()) continue;
    CHECK(exact_match_list(a, b, kDefault) == exact_match_list(b, a, kDefault));
  }
}

TEST_CASE("lcs_length basics and properties") {
  CHECK(lcs_length(std::vector<std::string>{"a", "b", "c"},
                   std::vector<std::string>{"a", "c"}) == 2);
  CHECK(lcs_length(std::vector<std::string>{"a"}, std::vector<std::string>{}) == 0);
  testutil::Rand rng(17);
  for (int iter = 0; iter < 400; ++iter) {
    const auto a = random_tokens(rng, 8);
    const auto b = random_tokens(rng, 8);
    const size_t got = lcs_length(a, b);
    CHECK(got == static_cast<size_t>(lcs_oracle(a, b)));
    CHECK(got <= std::min(a.size(), b.size()));
    CHECK(lcs_length(a, a) == a.size());
    auto ar = a, br = b;
    std::reverse(ar.begin(), ar.end());
    std::reverse(br.begin(), br.end());
    CHECK(lcs_length(ar, br) == got);
  }
}

TEST_CASE("rouge_l matches the hand-computed F-measure") {
  // LCS=2, P=2/3, R=1 -> F = 0.8.
  CHECK(rouge_l("the cat sat", "the cat", kDefault) == 0.8);
  CHECK(rouge_l("same words here", "same words here", kDefault) == 1.0);
  CHECK(rouge_l("aa bb", "cc dd", kDefault) == 0.0);
  CHECK_THROWS_AS(rouge_l("x", " . ", kDefault), EmptyReference);
}

TEST_CASE("rouge_l is exactly symmetric under argument swap") {
  testutil::Rand rng(23);
  for (int iter = 0; iter < 300; ++iter) {
    const auto a = join(random_tokens(rng, 6));
    const auto b = join(random_tokens(rng, 6));
    if (a.empty() || b.empty()) continue;
    CHECK(rouge_l(a, b, kDefault) == rouge_l(b, a, kDefault));
  }
}

TEST_CASE("bleu equals 1 on identical strings and stays in [0,1]") {
  CHECK(bleu("one two three four five", "one two three four five", kDefault) == 1.0);
  CHECK(bleu("ab", "ab", kDefault) == 1.0);
  testutil::Rand rng(29);
  for (int iter = 0; iter < 300; ++iter) {
    const auto c = join(random_tokens(rng, 7));
    const auto r = join(random_tokens(rng, 7));
    if (r.empty()) continue;
    const double value = bleu(c, r, kDefault);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
    const double rl = c.empty() ? 0.0 : rouge_l(c, r, kDefault);
    CHECK(rl >= 0.0);
    CHECK(rl <= 1.0);
  }
}

TEST_CASE("bleu brevity penalty matches exp(1 - ref/cand)") {
  // Candidate is the first half of the reference: all precisions are 1, so
  // the score is exactly the brevity penalty.
  CHECK(bleu("a b", "a b c d", kDefault) == std::exp(-1.0));
}

TEST_CASE("bleu on disjoint vocabularies is tiny") {
  const std::string cand = "a1 a2 a3 a4 a5 a6 a7 a8 a9 a10 a11 a12";
  const std::string ref = "b1 b2 b3 b4 b5 b6 b7 b8 b9 b10 b11 b12";
  const double value = bleu(cand, ref, kDefault);
  CHECK(value < 0.05);
  // Frozen from the independent oracle implementation of the stated
  // smoothing (k = count of earlier zero orders).
  CHECK(value == doctest::Approx(0.033864985683445356).epsilon(1e-12));
}

TEST_CASE("bleu smoothing follows the stated schedule") {
  // 4 disjoint tokens: p_n = 1/(2^(n-1) * |cand n-grams|) after the first
  // zero order, frozen from the oracle run.
  const double value = bleu("alpha beta gamma delta", "one two three four", kDefault);
  CHECK(value == doctest::Approx(0.15973577606156811).epsilon(1e-12));
  CHECK_THROWS_AS(bleu("x", "", kDefault), EmptyReference);
  CHECK(bleu("", "a b", kDefault) == 0.0);
}
