#include "tablerl/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tablerl/toy_task.hpp"

namespace tablerl {

namespace toyvocab {

const std::vector<std::string>& tokens() {
  static const std::vector<std::string> kTokens = {
      "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
      "<think>", "</think>", "<answer>", "</answer>",
      R"({"answer": [")", R"("]})", R"({"answer": ")", R"("})",
      "entailed", "refuted", R"(", ")", " ", ""};
  return kTokens;
}

const std::string& token_text(int id) { return tokens().at(static_cast<size_t>(id)); }

std::string render(std::span<const int> ids) {
  std::string out;
  for (int id : ids) out += token_text(id);
  return out;
}

}  // namespace toyvocab

namespace {

constexpr int kPromptVocab = TinyPolicy::kPromptVocabSize;  // printable + \n + OOV
constexpr int kBosSlot = toyvocab::kSize;  // extra input-embedding row

int prompt_char_id(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  if (u >= 32 && u <= 126) return u - 32;
  if (c == '\n') return 95;
  return 96;
}

double unit_from_bits(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Deterministic stream of doubles; std distributions are implementation
// defined, so initialization and sampling draw from this directly.
struct Rng {
  uint64_t state;
  uint64_t next() {
    state = mix_seed(state, 0x9e3779b97f4a7c15ULL);
    return state;
  }
  double unit() { return unit_from_bits(next()); }
};

}  // namespace

TinyPolicy::TinyPolicy(ToyPolicyDims dims, uint64_t seed, ToyInit init)
    : dims_(dims) {
  if (dims_.embed_dim < 1 || dims_.hidden_dim < 1 || dims_.window < 1) {
    throw Error("invalid policy dimensions");
  }
  const size_t d = static_cast<size_t>(dims_.embed_dim);
  const size_t h = static_cast<size_t>(dims_.hidden_dim);
  const size_t in = (static_cast<size_t>(dims_.window) + 1) * d;
  layout_.prompt_emb = 0;
  layout_.token_emb = layout_.prompt_emb + kPromptVocab * d;
  layout_.w1 = layout_.token_emb + static_cast<size_t>(kBosSlot + 1) * d;
  layout_.b1 = layout_.w1 + h * in;
  layout_.w2 = layout_.b1 + h;
  layout_.b2 = layout_.w2 + static_cast<size_t>(toyvocab::kSize) * h;
  layout_.total = layout_.b2 + static_cast<size_t>(toyvocab::kSize);
  params_.resize(layout_.total);

  // Box-Muller init for weight matrices and embeddings; biases start at 0.
  Rng rng{mix_seed(seed, 0x7f4a7c15ULL)};
  const double scale = 0.08;
  auto gaussian = [&rng, scale] {
    const double u1 = std::max(rng.unit(), 1e-12);
    const double u2 = rng.unit();
    return scale * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  };
  for (size_t i = 0; i < layout_.b1; ++i) params_[i] = gaussian();
  for (size_t i = layout_.w2; i < layout_.b2; ++i) params_[i] = gaussian();

  // The pooled prompt encoding averages over the prompt, which leaves it an
  // order of magnitude smaller than a token embedding. Scale its pathway up
  // so the hidden layer carries usable prompt features from the start.
  for (size_t i = layout_.prompt_emb; i < layout_.token_emb; ++i) {
    params_[i] *= 10.0;
  }
  const size_t pooled_col = static_cast<size_t>(dims_.window) * d;
  for (size_t row = 0; row < h; ++row) {
    for (size_t col = pooled_col; col < in; ++col) {
      params_[layout_.w1 + row * in + col] *= 10.0;
    }
  }

  if (init == ToyInit::template_primed) apply_template_prior();
}

// Weak prior over the response template, wired as previous-token detectors
// (hidden unit per token) feeding next-token logit bumps. Digits and both
// answer forms stay uniform so the task itself is unlearned.
void TinyPolicy::apply_template_prior() {
  using namespace toyvocab;
  const size_t d = static_cast<size_t>(dims_.embed_dim);
  const size_t h = static_cast<size_t>(dims_.hidden_dim);
  const size_t in = (static_cast<size_t>(dims_.window) + 1) * d;
  const size_t last_slot = (static_cast<size_t>(dims_.window) - 1) * d;

  // One-hot marker per token plus a biased saturated detector on the last
  // window slot: hidden[tok] ~ +1 when the previous token is tok, ~ -1
  // otherwise.
  for (int tok = 0; tok <= kBosSlot; ++tok) {
    params_[layout_.token_emb + static_cast<size_t>(tok) * d +
            static_cast<size_t>(tok)] += 1.0;
    params_[layout_.w1 + static_cast<size_t>(tok) * in + last_slot +
            static_cast<size_t>(tok)] += 6.0;
    params_[layout_.b1 + static_cast<size_t>(tok)] += -3.0;
  }

  // Splitting each bump between the weight and the output bias maps the
  // +-1 detector onto {strength, 0}, so unrelated tokens are untouched.
  auto bump = [&](int prev, int next, double strength) {
    params_[layout_.w2 + static_cast<size_t>(next) * h +
            static_cast<size_t>(prev)] += strength / 2.0;
    params_[layout_.b2 + static_cast<size_t>(next)] += strength / 2.0;
  };
  const double b = 7.0;
  bump(kBosSlot, kThinkOpen, b);
  bump(kThinkOpen, kThinkClose, b);
  bump(kThinkClose, kAnswerOpen, b);
  bump(kAnswerOpen, kTqaOpen, b);
  bump(kAnswerOpen, kStrOpen, b);
  for (int digit = 0; digit < 10; ++digit) {
    bump(kTqaOpen, digit, b);
    bump(kStrOpen, digit, b * 0.5);
  }
  bump(kStrOpen, kEntailed, b);
  bump(kStrOpen, kRefuted, b);
  for (int digit = 0; digit < 10; ++digit) {
    for (int next = 0; next < 10; ++next) bump(digit, next, b * 0.4);
    bump(digit, kTqaClose, b);
    bump(digit, kStrClose, b * 0.5);
  }
  bump(kEntailed, kStrClose, b);
  bump(kRefuted, kStrClose, b);
  bump(kTqaClose, kAnswerClose, b);
  bump(kStrClose, kAnswerClose, b);
  bump(kAnswerClose, kEos, b);

  // Hidden units past the detectors act as a random prompt-and-context
  // feature bank the answer heads can learn against. The heads themselves
  // start small, so digits stay near-uniform for every prompt and each
  // prompt keeps a live stream of exact-match hits.
  const size_t first_free = static_cast<size_t>(kBosSlot) + 1;
  for (size_t row = first_free; row < h; ++row) {
    for (size_t col = 0; col < last_slot + d; ++col) {
      params_[layout_.w1 + row * in + col] *= 6.0;
    }
  }
}

TinyPolicy::ParamViews TinyPolicy::views() {
  auto span_of = [this](size_t begin, size_t end) {
    return std::span<double>(params_.data() + begin, end - begin);
  };
  return ParamViews{span_of(layout_.prompt_emb, layout_.token_emb),
                    span_of(layout_.token_emb, layout_.w1),
                    span_of(layout_.w1, layout_.b1),
                    span_of(layout_.b1, layout_.w2),
                    span_of(layout_.w2, layout_.b2),
                    span_of(layout_.b2, layout_.total)};
}

std::vector<int> TinyPolicy::prompt_char_ids(std::string_view text,
                                             size_t max_chars) {
  std::vector<int> ids;
  ids.reserve(std::min(text.size(), max_chars));
  for (size_t i = 0; i < text.size() && i < max_chars; ++i) {
    ids.push_back(prompt_char_id(text[i]));
  }
  return ids;
}

namespace {

constexpr size_t kMaxPromptLen = 4096;

// Fixed +-1 positional signs for the pooled prompt encoding. A plain mean
// of character embeddings is nearly identical across prompts that share a
// character distribution; signing each (dimension, position) pair keeps
// distinct prompts distinguishable while staying a pooling.
double pool_sign(size_t dim, size_t position) {
  static const std::vector<uint64_t> table = [] {
    std::vector<uint64_t> bits(kMaxPromptLen);
    for (size_t p = 0; p < kMaxPromptLen; ++p) bits[p] = mix_seed(0x5167u, p);
    return bits;
  }();
  return (table[position % kMaxPromptLen] >> (dim % 64)) & 1 ? 1.0 : -1.0;
}

}  // namespace

std::vector<double> TinyPolicy::pooled_prompt(std::span<const int> prompt_ids) const {
  const size_t d = static_cast<size_t>(dims_.embed_dim);
  std::vector<double> pooled(d, 0.0);
  if (prompt_ids.empty()) return pooled;
  for (size_t p = 0; p < prompt_ids.size(); ++p) {
    const double* emb = params_.data() + layout_.prompt_emb +
                        static_cast<size_t>(prompt_ids[p]) * d;
    for (size_t j = 0; j < d; ++j) pooled[j] += pool_sign(j, p) * emb[j];
  }
  const double inv = 1.0 / static_cast<double>(prompt_ids.size());
  for (double& v : pooled) v *= inv;
  return pooled;
}

void TinyPolicy::forward_position(std::span<const double> pooled,
                                  std::span<const int> tokens, size_t position,
                                  std::span<double> hidden,
                                  std::span<double> logits) const {
  const size_t d = static_cast<size_t>(dims_.embed_dim);
  const size_t h = static_cast<size_t>(dims_.hidden_dim);
  const size_t window = static_cast<size_t>(dims_.window);
  const size_t in = (window + 1) * d;

  // Input vector: window token embeddings (BOS-padded), then pooled prompt.
  std::vector<double> x(in);
  for (size_t w = 0; w < window; ++w) {
    // Slot w holds the token at position - window + w (BOS before start).
    const long long idx = static_cast<long long>(position) -
                          static_cast<long long>(window) +
                          static_cast<long long>(w);
    const int token = idx >= 0 ? tokens[static_cast<size_t>(idx)] : kBosSlot;
    const double* emb = params_.data() + layout_.token_emb +
                        static_cast<size_t>(token) * d;
    std::copy(emb, emb + d, x.begin() + static_cast<long>(w * d));
  }
  std::copy(pooled.begin(), pooled.end(), x.begin() + static_cast<long>(window * d));

  const double* w1 = params_.data() + layout_.w1;
  const double* b1 = params_.data() + layout_.b1;
  for (size_t i = 0; i < h; ++i) {
    double acc = b1[i];
    const double* row = w1 + i * in;
    for (size_t j = 0; j < in; ++j) acc += row[j] * x[j];
    hidden[i] = std::tanh(acc);
  }
  const double* w2 = params_.data() + layout_.w2;
  const double* b2 = params_.data() + layout_.b2;
  for (size_t v = 0; v < static_cast<size_t>(toyvocab::kSize); ++v) {
    double acc = b2[v];
    const double* row = w2 + v * h;
    for (size_t i = 0; i < h; ++i) acc += row[i] * hidden[i];
    logits[v] = acc;
  }
}

std::vector<double> TinyPolicy::next_logits(std::span<const int> prompt_ids,
                                            std::span<const int> prefix) const {
  const auto pooled = pooled_prompt(prompt_ids);
  std::vector<double> hidden(static_cast<size_t>(dims_.hidden_dim));
  std::vector<double> logits(toyvocab::kSize);
  forward_position(pooled, prefix, prefix.size(), hidden, logits);
  return logits;
}

namespace {

// softmax(logits / T) in place; returns log-normalizer of logits / T.
double softmax_temperature(std::span<double> logits, double temperature) {
  for (double& v : logits) v /= temperature;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return peak + std::log(sum);
}

// Nucleus filter: keeps the smallest probability-sorted prefix reaching
// top_p, renormalized. probs is overwritten; dropped entries become 0.
void apply_top_p(std::span<double> probs, double top_p) {
  if (top_p >= 1.0) return;
  std::vector<size_t> order(probs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return probs[a] > probs[b]; });
  double cumulative = 0.0;
  size_t keep = 0;
  for (; keep < order.size(); ++keep) {
    cumulative += probs[order[keep]];
    if (cumulative >= top_p) {
      ++keep;
      break;
    }
  }
  std::vector<double> kept(probs.size(), 0.0);
  double mass = 0.0;
  for (size_t i = 0; i < keep; ++i) mass += probs[order[i]];
  for (size_t i = 0; i < keep; ++i) kept[order[i]] = probs[order[i]] / mass;
  std::copy(kept.begin(), kept.end(), probs.begin());
}

}  // namespace

std::vector<double> TinyPolicy::score_sequence(std::span<const int> prompt_ids,
                                               std::span<const int> tokens,
                                               double temperature,
                                               double top_p) const {
  if (temperature <= 0.0) throw Error("temperature must be positive");
  const auto pooled = pooled_prompt(prompt_ids);
  std::vector<double> hidden(static_cast<size_t>(dims_.hidden_dim));
  std::vector<double> logits(toyvocab::kSize);
  std::vector<double> out;
  out.reserve(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) {
    forward_position(pooled, tokens, t, hidden, logits);
    softmax_temperature(logits, temperature);  // logits now holds probs
    apply_top_p(logits, top_p);
    const double p = logits[static_cast<size_t>(tokens[t])];
    out.push_back(p > 0.0 ? std::log(p)
                          : -std::numeric_limits<double>::infinity());
  }
  return out;
}

ToyRollout TinyPolicy::sample(std::span<const int> prompt_ids, double temperature,
                              double top_p, int max_tokens, uint64_t seed) const {
  if (temperature <= 0.0) throw Error("temperature must be positive");
  if (max_tokens < 1) throw Error("max_tokens must be at least 1");
  const auto pooled = pooled_prompt(prompt_ids);
  std::vector<double> hidden(static_cast<size_t>(dims_.hidden_dim));
  std::vector<double> probs(toyvocab::kSize);

  Rng rng{mix_seed(seed, 0xda3e39cb94b95bdbULL)};
  ToyRollout rollout;
  while (static_cast<int>(rollout.tokens.size()) < max_tokens) {
    forward_position(pooled, rollout.tokens, rollout.tokens.size(), hidden, probs);
    softmax_temperature(probs, temperature);
    apply_top_p(probs, top_p);

    const double u = rng.unit();
    double cumulative = 0.0;
    int chosen = toyvocab::kSize - 1;
    for (int v = 0; v < toyvocab::kSize; ++v) {
      cumulative += probs[static_cast<size_t>(v)];
      if (u < cumulative) {
        chosen = v;
        break;
      }
    }
    // Guard against roundoff selecting a zero-probability tail entry.
    while (probs[static_cast<size_t>(chosen)] <= 0.0 && chosen > 0) --chosen;

    rollout.tokens.push_back(chosen);
    rollout.logp.push_back(std::log(probs[static_cast<size_t>(chosen)]));
    if (chosen == toyvocab::kEos) break;
  }
  rollout.text = toyvocab::render(rollout.tokens);
  return rollout;
}

void TinyPolicy::accumulate_grad(std::span<const int> prompt_ids,
                                 std::span<const int> tokens,
                                 std::span<const double> coeff,
                                 double temperature,
                                 std::span<double> grad) const {
  if (tokens.size() != coeff.size()) throw Error("coeff/token size mismatch");
  if (grad.size() != params_.size()) throw Error("grad buffer size mismatch");
  if (temperature <= 0.0) throw Error("temperature must be positive");

  const size_t d = static_cast<size_t>(dims_.embed_dim);
  const size_t h = static_cast<size_t>(dims_.hidden_dim);
  const size_t window = static_cast<size_t>(dims_.window);
  const size_t in = (window + 1) * d;
  const size_t vocab = static_cast<size_t>(toyvocab::kSize);

  const auto pooled = pooled_prompt(prompt_ids);
  std::vector<double> hidden(h), logits(vocab), probs(vocab);
  std::vector<double> dlogits(vocab), dhidden(h), dpre(h), dx(in);
  std::vector<double> dpooled(d, 0.0);

  const double* w1 = params_.data() + layout_.w1;
  const double* w2 = params_.data() + layout_.w2;

  for (size_t t = 0; t < tokens.size(); ++t) {
    if (coeff[t] == 0.0) continue;
    forward_position(pooled, tokens, t, hidden, logits);
    std::copy(logits.begin(), logits.end(), probs.begin());
    softmax_temperature(probs, temperature);

    // d(coeff * logp(y)) / dlogits = coeff * (onehot(y) - softmax) / T
    const double scale = coeff[t] / temperature;
    for (size_t v = 0; v < vocab; ++v) dlogits[v] = -scale * probs[v];
    dlogits[static_cast<size_t>(tokens[t])] += scale;

    // Output layer.
    double* gw2 = grad.data() + layout_.w2;
    double* gb2 = grad.data() + layout_.b2;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (size_t v = 0; v < vocab; ++v) {
      const double dv = dlogits[v];
      if (dv == 0.0) continue;
      gb2[v] += dv;
      double* gw2_row = gw2 + v * h;
      const double* w2_row = w2 + v * h;
      for (size_t i = 0; i < h; ++i) {
        gw2_row[i] += dv * hidden[i];
        dhidden[i] += dv * w2_row[i];
      }
    }

    // Hidden layer (tanh).
    for (size_t i = 0; i < h; ++i) {
      dpre[i] = dhidden[i] * (1.0 - hidden[i] * hidden[i]);
    }

    // Rebuild x for this position (cheaper than caching all positions).
    std::vector<double> x(in);
    for (size_t w = 0; w < window; ++w) {
      const long long idx = static_cast<long long>(t) -
                            static_cast<long long>(window) +
                            static_cast<long long>(w);
      const int token = idx >= 0 ? tokens[static_cast<size_t>(idx)] : kBosSlot;
      const double* emb = params_.data() + layout_.token_emb +
                          static_cast<size_t>(token) * d;
      std::copy(emb, emb + d, x.begin() + static_cast<long>(w * d));
    }
    std::copy(pooled.begin(), pooled.end(), x.begin() + static_cast<long>(window * d));

    double* gw1 = grad.data() + layout_.w1;
    double* gb1 = grad.data() + layout_.b1;
    std::fill(dx.begin(), dx.end(), 0.0);
    for (size_t i = 0; i < h; ++i) {
      const double dp = dpre[i];
      if (dp == 0.0) continue;
      gb1[i] += dp;
      double* gw1_row = gw1 + i * in;
      const double* w1_row = w1 + i * in;
      for (size_t j = 0; j < in; ++j) {
        gw1_row[j] += dp * x[j];
        dx[j] += dp * w1_row[j];
      }
    }

    // Scatter dx into the window token embeddings and the pooled slot.
    for (size_t w = 0; w < window; ++w) {
      const long long idx = static_cast<long long>(t) -
                            static_cast<long long>(window) +
                            static_cast<long long>(w);
      const int token = idx >= 0 ? tokens[static_cast<size_t>(idx)] : kBosSlot;
      double* gemb = grad.data() + layout_.token_emb +
                     static_cast<size_t>(token) * d;
      for (size_t j = 0; j < d; ++j) gemb[j] += dx[w * d + j];
    }
    for (size_t j = 0; j < d; ++j) dpooled[j] += dx[window * d + j];
  }

  // Pooled prompt encoding: position p contributes sign(j,p)/P.
  if (!prompt_ids.empty()) {
    const double inv = 1.0 / static_cast<double>(prompt_ids.size());
    for (size_t p = 0; p < prompt_ids.size(); ++p) {
      double* gemb = grad.data() + layout_.prompt_emb +
                     static_cast<size_t>(prompt_ids[p]) * d;
      for (size_t j = 0; j < d; ++j) {
        gemb[j] += pool_sign(j, p) * inv * dpooled[j];
      }
    }
  }
}

std::vector<ToyRollout> sample_rollouts(const TinyPolicy& policy,
                                        std::span<const int> prompt_ids,
                                        int group_size, double temperature,
                                        double top_p, int max_tokens,
                                        uint64_t seed) {
  if (group_size < 1) throw Error("group_size must be at least 1");
  std::vector<ToyRollout> rollouts;
  rollouts.reserve(static_cast<size_t>(group_size));
  for (int g = 0; g < group_size; ++g) {
    rollouts.push_back(policy.sample(prompt_ids, temperature, top_p, max_tokens,
                                     mix_seed(seed, static_cast<uint64_t>(g))));
  }
  return rollouts;
}

}  // namespace tablerl
