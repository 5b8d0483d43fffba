#pragma once

#include <span>
#include <string>
#include <vector>

#include "tablerl/errors.hpp"

namespace tablerl {

// Transforms are applied in a fixed order: lowercase, strip edge punctuation
// per token, strip thousands separators inside digit runs, collapse
// whitespace runs to single spaces and trim. ASCII-only by design; bytes
// outside ASCII pass through untouched.
struct NormalizationPolicy {
  bool lowercase = true;
  bool strip_punct_edges = true;
  bool collapse_whitespace = true;
  bool strip_thousands_separators = true;
  // Strict sequence comparison for exact_match_list instead of the default
  // order-insensitive multiset comparison.
  bool order_sensitive_em = false;
};

std::string normalize(const std::string& text, const NormalizationPolicy& policy);

std::vector<std::string> tokenize(const std::string& text,
                                  const NormalizationPolicy& policy);

// 1 iff the normalized answer multisets are equal (sequences, when
// policy.order_sensitive_em). `gold` must be non-empty.
int exact_match_list(std::span<const std::string> pred,
                     std::span<const std::string> gold,
                     const NormalizationPolicy& policy);

// Longest common subsequence length; O(|a|*|b|) time, O(min(|a|,|b|)) space.
size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Sentence-level ROUGE-L F-measure (beta = 1) over whitespace tokens after
// normalization. Throws EmptyReference when the reference normalizes away.
double rouge_l(const std::string& candidate, const std::string& reference,
               const NormalizationPolicy& policy);

// Sentence-level BLEU in [0,1] up to `max_n`-grams with brevity penalty
// exp(1 - |ref|/|cand|) for short candidates. A zero modified precision at
// order n is smoothed to 1 / (2^k * |candidate n-grams|), k = number of
// zero orders before n. Orders with no candidate n-grams are dropped.
// Throws EmptyReference when the reference normalizes away.
double bleu(const std::string& candidate, const std::string& reference,
            const NormalizationPolicy& policy, int max_n = 4);

}  // namespace tablerl
