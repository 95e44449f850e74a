#include "omnirl/policy.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "omnirl/errors.h"
#include "omnirl/rng.h"

namespace omnirl {
namespace {

void check_config(const PolicyConfig& c) {
  if (c.vocab_size < 8 || c.vocab_size > 512) throw InputError("vocab_size must be in [8, 512]");
  if (c.embed_dim < 1 || c.context < 1 || c.hidden < 1) {
    throw InputError("embed_dim, context and hidden must be positive");
  }
}

void check_tokens(const PolicyParams& params, std::span<const TokenId> ids) {
  const int v = params.config().vocab_size;
  for (TokenId id : ids) {
    if (id < 0 || id >= v) throw InputError("token id out of range: " + std::to_string(id));
  }
}

// Activations of one forward pass, kept for the backward pass.
struct Activations {
  std::vector<TokenId> context;
  std::vector<double> input;   // w*d
  std::vector<double> hidden;  // h, post-tanh
  std::vector<double> logits;  // V
};

void forward(const PolicyParams& p, std::span<const TokenId> context, Activations& a) {
  const PolicyConfig& c = p.config();
  const size_t d = static_cast<size_t>(c.embed_dim);
  const size_t h = static_cast<size_t>(c.hidden);
  const size_t v = static_cast<size_t>(c.vocab_size);
  const size_t in = p.input_dim();
  const auto theta = p.values();

  a.context.assign(context.begin(), context.end());
  a.input.resize(in);
  for (size_t j = 0; j < context.size(); ++j) {
    const double* row = theta.data() + p.embedding_offset() + static_cast<size_t>(context[j]) * d;
    std::copy(row, row + d, a.input.begin() + static_cast<std::ptrdiff_t>(j * d));
  }

  a.hidden.resize(h);
  const double* w1 = theta.data() + p.w1_offset();
  const double* b1 = theta.data() + p.b1_offset();
  for (size_t k = 0; k < h; ++k) {
    const double* row = w1 + k * in;
    double s = b1[k];
    for (size_t i = 0; i < in; ++i) s += row[i] * a.input[i];
    a.hidden[k] = std::tanh(s);
  }

  a.logits.resize(v);
  const double* w2 = theta.data() + p.w2_offset();
  const double* b2 = theta.data() + p.b2_offset();
  for (size_t t = 0; t < v; ++t) {
    const double* row = w2 + t * h;
    double s = b2[t];
    for (size_t k = 0; k < h; ++k) s += row[k] * a.hidden[k];
    a.logits[t] = s;
  }
}

double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double xi : x) s += std::exp(xi - m);
  return m + std::log(s);
}

// Adds dL/dlogits (given) into the parameter gradient.
void backward(const PolicyParams& p, const Activations& a, std::span<const double> dlogits,
              std::span<double> grad, std::vector<double>& scratch_hidden,
              std::vector<double>& scratch_input) {
  const PolicyConfig& c = p.config();
  const size_t d = static_cast<size_t>(c.embed_dim);
  const size_t h = static_cast<size_t>(c.hidden);
  const size_t v = static_cast<size_t>(c.vocab_size);
  const size_t in = p.input_dim();
  const auto theta = p.values();

  const double* w2 = theta.data() + p.w2_offset();
  double* gw2 = grad.data() + p.w2_offset();
  double* gb2 = grad.data() + p.b2_offset();
  scratch_hidden.assign(h, 0.0);
  for (size_t t = 0; t < v; ++t) {
    const double g = dlogits[t];
    if (g == 0.0) continue;
    gb2[t] += g;
    double* grow = gw2 + t * h;
    const double* row = w2 + t * h;
    for (size_t k = 0; k < h; ++k) {
      grow[k] += g * a.hidden[k];
      scratch_hidden[k] += g * row[k];
    }
  }
  // Through tanh.
  for (size_t k = 0; k < h; ++k) scratch_hidden[k] *= 1.0 - a.hidden[k] * a.hidden[k];

  const double* w1 = theta.data() + p.w1_offset();
  double* gw1 = grad.data() + p.w1_offset();
  double* gb1 = grad.data() + p.b1_offset();
  scratch_input.assign(in, 0.0);
  for (size_t k = 0; k < h; ++k) {
    const double g = scratch_hidden[k];
    gb1[k] += g;
    double* grow = gw1 + k * in;
    const double* row = w1 + k * in;
    for (size_t i = 0; i < in; ++i) {
      grow[i] += g * a.input[i];
      scratch_input[i] += g * row[i];
    }
  }
  double* ge = grad.data() + p.embedding_offset();
  for (size_t j = 0; j < a.context.size(); ++j) {
    double* row = ge + static_cast<size_t>(a.context[j]) * d;
    for (size_t i = 0; i < d; ++i) row[i] += scratch_input[j * d + i];
  }
}

void check_prompt(std::span<const TokenId> prompt) {
  if (prompt.empty()) throw InputError("prompt must not be empty");
}

}  // namespace

PolicyParams::PolicyParams(PolicyConfig config) : config_(config) {
  check_config(config_);
  values_.assign(parameter_count(config_), 0.0);
}

PolicyParams PolicyParams::random(PolicyConfig config, uint64_t seed, double scale) {
  PolicyParams p(config);
  Rng rng(seed);
  for (double& x : p.values_) x = rng.uniform(-scale, scale);
  return p;
}

size_t PolicyParams::parameter_count(const PolicyConfig& c) {
  const size_t v = static_cast<size_t>(c.vocab_size);
  const size_t d = static_cast<size_t>(c.embed_dim);
  const size_t w = static_cast<size_t>(c.context);
  const size_t h = static_cast<size_t>(c.hidden);
  return v * d + h * w * d + h + v * h + v;
}

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool PolicyParams::operator==(const PolicyParams& other) const {
  if (!(config_ == other.config_) || values_.size() != other.values_.size()) return false;
  // Bitwise, so that -0.0 and NaN payloads are compared exactly.
  return std::equal(values_.begin(), values_.end(), other.values_.begin(), [](double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
  });
}

std::vector<TokenId> make_context(std::span<const TokenId> history, int window) {
  std::vector<TokenId> ctx(static_cast<size_t>(window), kPadToken);
  const size_t n = std::min(history.size(), static_cast<size_t>(window));
  std::copy(history.end() - static_cast<std::ptrdiff_t>(n), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(n));
  return ctx;
}

std::vector<double> forward_logits(const PolicyParams& params, std::span<const TokenId> context) {
  if (context.size() != static_cast<size_t>(params.config().context)) {
    throw InputError("context length must equal the window length");
  }
  check_tokens(params, context);
  Activations a;
  forward(params, context, a);
  return a.logits;
}

Rollout sample_completion(const PolicyParams& params, std::span<const TokenId> prompt,
                          const DecodingConfig& decoding, uint64_t seed) {
  check_prompt(prompt);
  check_tokens(params, prompt);
  if (decoding.max_len < 1) throw InputError("max_len must be >= 1");
  if (!(decoding.temperature > 0.0)) throw InputError("temperature must be > 0");
  if (decoding.top_k < 1) throw InputError("top_k must be >= 1");

  const int v = params.config().vocab_size;
  const int k = std::min(decoding.top_k, v);
  Rng rng(seed);
  Rollout r;
  r.prompt.assign(prompt.begin(), prompt.end());
  std::vector<TokenId> history(prompt.begin(), prompt.end());
  std::vector<int> order(static_cast<size_t>(v));
  std::vector<double> scaled(static_cast<size_t>(k));
  Activations a;

  for (int step = 0; step < decoding.max_len; ++step) {
    forward(params, make_context(history, params.config().context), a);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int x, int y) {
      if (a.logits[static_cast<size_t>(x)] != a.logits[static_cast<size_t>(y)]) {
        return a.logits[static_cast<size_t>(x)] > a.logits[static_cast<size_t>(y)];
      }
      return x < y;
    });
    for (int i = 0; i < k; ++i) {
      scaled[static_cast<size_t>(i)] = a.logits[static_cast<size_t>(order[static_cast<size_t>(i)])] /
                                       decoding.temperature;
    }
    const double lse = log_sum_exp(scaled);
    int chosen = k - 1;
    if (k > 1) {
      const double u = rng.uniform();
      double cdf = 0.0;
      for (int i = 0; i < k; ++i) {
        cdf += std::exp(scaled[static_cast<size_t>(i)] - lse);
        if (u < cdf) {
          chosen = i;
          break;
        }
      }
    }
    const TokenId tok = order[static_cast<size_t>(chosen)];
    r.completion.push_back(tok);
    r.logprobs.push_back(std::min(0.0, scaled[static_cast<size_t>(chosen)] - lse));
    history.push_back(tok);
    if (tok == kEosToken) {
      r.terminated = true;
      break;
    }
  }
  return r;
}

std::vector<TokenId> greedy_completion(const PolicyParams& params, std::span<const TokenId> prompt,
                                       int max_len) {
  DecodingConfig greedy;
  greedy.top_k = 1;
  greedy.max_len = max_len;
  return sample_completion(params, prompt, greedy, 0).completion;
}

std::vector<double> sequence_logprob(const PolicyParams& params, std::span<const TokenId> prompt,
                                     std::span<const TokenId> completion) {
  check_prompt(prompt);
  check_tokens(params, prompt);
  check_tokens(params, completion);
  std::vector<TokenId> history(prompt.begin(), prompt.end());
  std::vector<double> out;
  out.reserve(completion.size());
  Activations a;
  for (TokenId tok : completion) {
    forward(params, make_context(history, params.config().context), a);
    const double lp = a.logits[static_cast<size_t>(tok)] - log_sum_exp(a.logits);
    out.push_back(std::min(0.0, lp));
    history.push_back(tok);
  }
  return out;
}

void accumulate_weighted_logprob_grad(const PolicyParams& params, std::span<const TokenId> prompt,
                                      std::span<const TokenId> completion,
                                      std::span<const double> coeffs, std::span<double> grad) {
  check_prompt(prompt);
  if (coeffs.size() != completion.size()) {
    throw InputError("coefficient vector length must equal completion length");
  }
  if (grad.size() != params.size()) throw InputError("gradient buffer has the wrong size");
  for (double g : coeffs) {
    if (std::isnan(g)) throw InputError("NaN coefficient");
  }
  check_tokens(params, prompt);
  check_tokens(params, completion);

  std::vector<TokenId> history(prompt.begin(), prompt.end());
  Activations a;
  std::vector<double> dlogits;
  std::vector<double> sh, si;
  for (size_t t = 0; t < completion.size(); ++t) {
    const TokenId tok = completion[t];
    const double g = coeffs[t];
    if (g != 0.0) {
      forward(params, make_context(history, params.config().context), a);
      // d logprob / d logits = onehot(tok) - softmax(logits)
      const double lse = log_sum_exp(a.logits);
      dlogits.resize(a.logits.size());
      for (size_t i = 0; i < a.logits.size(); ++i) dlogits[i] = -g * std::exp(a.logits[i] - lse);
      dlogits[static_cast<size_t>(tok)] += g;
      backward(params, a, dlogits, grad, sh, si);
    }
    history.push_back(tok);
  }
}

std::vector<double> backward_weighted_logprob(const PolicyParams& params,
                                              std::span<const TokenId> prompt,
                                              std::span<const TokenId> completion,
                                              std::span<const double> coeffs) {
  std::vector<double> grad(params.size(), 0.0);
  accumulate_weighted_logprob_grad(params, prompt, completion, coeffs, grad);
  return grad;
}

std::vector<double> finite_difference_gradient(const PolicyParams& params,
                                               const std::function<double(const PolicyParams&)>& loss,
                                               double step, std::span<const size_t> coords) {
  if (!(step > 0.0)) throw InputError("finite-difference step must be > 0");
  std::vector<double> grad(params.size(), 0.0);
  PolicyParams probe = params;
  auto one = [&](size_t i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = loss(probe);
    probe[i] = orig - step;
    const double down = loss(probe);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  };
  if (coords.empty()) {
    for (size_t i = 0; i < params.size(); ++i) one(i);
  } else {
    for (size_t i : coords) {
      if (i >= params.size()) throw InputError("coordinate out of range");
      one(i);
    }
  }
  return grad;
}

}  // namespace omnirl
