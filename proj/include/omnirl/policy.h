#ifndef OMNIRL_POLICY_H_
#define OMNIRL_POLICY_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "omnirl/vocabulary.h"

namespace omnirl {

struct PolicyConfig {
  int vocab_size = 96;
  int embed_dim = 16;
  int context = 8;  // window length w
  int hidden = 64;

  bool operator==(const PolicyConfig&) const = default;
};

// Flat parameter vector of the fixed-window policy
//
//   x      = concat(E[c_1], ..., E[c_w])          (w*d)
//   hidden = tanh(W1 x + b1)                      (h)
//   logits = W2 hidden + b2                       (V)
//
// stored as [E | W1 | b1 | W2 | b2], all row-major.
class PolicyParams {
 public:
  // Zero-initialized.
  explicit PolicyParams(PolicyConfig config);
  // Uniform in [-scale, scale].
  static PolicyParams random(PolicyConfig config, uint64_t seed, double scale = 0.08);

  const PolicyConfig& config() const { return config_; }
  size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](size_t i) { return values_[i]; }
  double operator[](size_t i) const { return values_[i]; }

  size_t embedding_offset() const { return 0; }
  size_t w1_offset() const { return embedding_offset() + vd(); }
  size_t b1_offset() const { return w1_offset() + static_cast<size_t>(config_.hidden) * input_dim(); }
  size_t w2_offset() const { return b1_offset() + static_cast<size_t>(config_.hidden); }
  size_t b2_offset() const {
    return w2_offset() + static_cast<size_t>(config_.vocab_size) * static_cast<size_t>(config_.hidden);
  }
  size_t input_dim() const { return static_cast<size_t>(config_.context) * static_cast<size_t>(config_.embed_dim); }

  bool all_finite() const;
  bool operator==(const PolicyParams& other) const;

  static size_t parameter_count(const PolicyConfig& config);

 private:
  size_t vd() const { return static_cast<size_t>(config_.vocab_size) * static_cast<size_t>(config_.embed_dim); }

  PolicyConfig config_;
  std::vector<double> values_;
};

struct DecodingConfig {
  double temperature = 1.0;
  int top_k = 50;
  int max_len = 16;
};

// A sampled completion with the log-probabilities of the (temperature-scaled,
// top-k renormalized) distributions it was drawn from.
struct Rollout {
  std::vector<TokenId> prompt;
  std::vector<TokenId> completion;
  std::vector<double> logprobs;
  bool terminated = false;  // ended with EOS

  bool operator==(const Rollout&) const = default;
};

// Last `window` tokens of `history`, left-padded with PAD.
std::vector<TokenId> make_context(std::span<const TokenId> history, int window);

std::vector<double> forward_logits(const PolicyParams& params, std::span<const TokenId> context);

Rollout sample_completion(const PolicyParams& params, std::span<const TokenId> prompt,
                          const DecodingConfig& decoding, uint64_t seed);

// Argmax decoding (top_k = 1); ties resolve to the lowest token id.
std::vector<TokenId> greedy_completion(const PolicyParams& params, std::span<const TokenId> prompt,
                                       int max_len);

// Full-softmax per-token log-probabilities of `completion` given `prompt`.
std::vector<double> sequence_logprob(const PolicyParams& params, std::span<const TokenId> prompt,
                                     std::span<const TokenId> completion);

// Gradient of L = sum_t coeffs[t] * logprob_t with respect to the parameters.
std::vector<double> backward_weighted_logprob(const PolicyParams& params,
                                              std::span<const TokenId> prompt,
                                              std::span<const TokenId> completion,
                                              std::span<const double> coeffs);

// Same, accumulated into `grad` (size must equal params.size()).
void accumulate_weighted_logprob_grad(const PolicyParams& params, std::span<const TokenId> prompt,
                                      std::span<const TokenId> completion,
                                      std::span<const double> coeffs, std::span<double> grad);

// Central differences. Evaluates only `coords` when given, leaving the other
// entries of the result at zero.
std::vector<double> finite_difference_gradient(const PolicyParams& params,
                                               const std::function<double(const PolicyParams&)>& loss,
                                               double step,
                                               std::span<const size_t> coords = {});

}  // namespace omnirl

#endif  // OMNIRL_POLICY_H_
