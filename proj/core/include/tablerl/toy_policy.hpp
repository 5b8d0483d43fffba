#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tablerl/errors.hpp"

namespace tablerl {

// Response-side vocabulary of the toy policy: digits, the response template's
// structural tokens, JSON answer skeleton pieces, TFV labels, a list
// separator, a space, and an end-of-sequence marker.
namespace toyvocab {

inline constexpr int kDigit0 = 0;  // ids 0..9 are the digits "0".."9"
inline constexpr int kThinkOpen = 10;
inline constexpr int kThinkClose = 11;
inline constexpr int kAnswerOpen = 12;
inline constexpr int kAnswerClose = 13;
inline constexpr int kTqaOpen = 14;    // {"answer": ["
inline constexpr int kTqaClose = 15;   // "]}
inline constexpr int kStrOpen = 16;    // {"answer": "
inline constexpr int kStrClose = 17;   // "}
inline constexpr int kEntailed = 18;
inline constexpr int kRefuted = 19;
inline constexpr int kListSep = 20;    // ", "
inline constexpr int kSpace = 21;
inline constexpr int kEos = 22;
inline constexpr int kSize = 23;

const std::vector<std::string>& tokens();
const std::string& token_text(int id);
std::string render(std::span<const int> ids);  // EOS renders as nothing

}  // namespace toyvocab

struct ToyRollout {
  std::vector<int> tokens;   // sampled ids, EOS included when emitted
  std::vector<double> logp;  // per token, under the sampling distribution
  std::string text;
};

struct ToyPolicyDims {
  int embed_dim = 32;
  int hidden_dim = 64;
  int window = 4;  // response tokens of context, BOS-padded at the start
};

// random: small gaussian weights, near-uniform outputs.
// template_primed: random init plus weak next-token transition bumps along
// the response template (tags, JSON skeleton, uniform digits/labels). This
// stands in for the pretrained model RLVR builds on; answers stay random,
// so accuracy starts near zero while the structure is merely probable, not
// locked.
enum class ToyInit { random, template_primed };

// Windowed autoregressive categorical model over the toy vocabulary,
// conditioned on a mean-pooled character encoding of the prompt. Small
// enough that the reverse pass is hand-written and finite-difference
// checkable.
class TinyPolicy {
 public:
  TinyPolicy(ToyPolicyDims dims, uint64_t seed, ToyInit init = ToyInit::random);

  const ToyPolicyDims& dims() const { return dims_; }
  size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Named views over the flat parameter vector. Matrices are row-major:
  // w1 is hidden x ((window+1)*embed), w2 is vocab x hidden.
  struct ParamViews {
    std::span<double> prompt_emb;  // prompt_vocab x embed
    std::span<double> token_emb;   // (vocab+1 BOS row) x embed
    std::span<double> w1;
    std::span<double> b1;
    std::span<double> w2;
    std::span<double> b2;
  };
  ParamViews views();

  static constexpr int kPromptVocabSize = 97;

  // Prompt characters -> small id alphabet (printable ASCII + newline + OOV),
  // truncated to max_chars.
  static std::vector<int> prompt_char_ids(std::string_view text, size_t max_chars);

  // Next-token distribution support: raw logits given the pooled prompt
  // encoding and the last `window` response tokens (BOS-padded).
  std::vector<double> next_logits(std::span<const int> prompt_ids,
                                  std::span<const int> prefix) const;

  // log P(tokens | prompt) per position at `temperature` with nucleus
  // truncation `top_p` (1.0 = full distribution; a token outside the nucleus
  // scores -inf).
  std::vector<double> score_sequence(std::span<const int> prompt_ids,
                                     std::span<const int> tokens,
                                     double temperature, double top_p) const;

  ToyRollout sample(std::span<const int> prompt_ids, double temperature,
                    double top_p, int max_tokens, uint64_t seed) const;

  // Adds d/dparams of sum_t coeff[t] * logp(tokens[t]) to `grad`
  // (full distribution; temperature as in scoring). grad.size() must equal
  // param_count().
  void accumulate_grad(std::span<const int> prompt_ids,
                       std::span<const int> tokens,
                       std::span<const double> coeff, double temperature,
                       std::span<double> grad) const;

 private:
  struct Layout {
    size_t prompt_emb = 0;  // offsets into params_
    size_t token_emb = 0;
    size_t w1 = 0;
    size_t b1 = 0;
    size_t w2 = 0;
    size_t b2 = 0;
    size_t total = 0;
  };

  void apply_template_prior();
  std::vector<double> pooled_prompt(std::span<const int> prompt_ids) const;
  void forward_position(std::span<const double> pooled,
                        std::span<const int> tokens, size_t position,
                        std::span<double> hidden,
                        std::span<double> logits) const;

  ToyPolicyDims dims_;
  Layout layout_;
  std::vector<double> params_;
};

// G independent rollouts for one prompt under the given sampling settings;
// deterministic given `seed`.
std::vector<ToyRollout> sample_rollouts(const TinyPolicy& policy,
                                        std::span<const int> prompt_ids,
                                        int group_size, double temperature,
                                        double top_p, int max_tokens,
                                        uint64_t seed);

}  // namespace tablerl
