#include "omnirl/policy.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "omnirl/errors.h"
#include "test_util.h"

namespace omnirl {
namespace {

using testing::max_relative_error;
using testing::random_tokens;
using testing::random_vector;
using testing::tiny_config;

// Independent forward pass written from the documented parameter layout.
std::vector<double> oracle_logits(const PolicyParams& p, const std::vector<TokenId>& ctx) {
  const auto& c = p.config();
  const auto th = p.values();
  std::vector<double> x;
  for (TokenId t : ctx) {
    for (int i = 0; i < c.embed_dim; ++i) x.push_back(th[static_cast<size_t>(t * c.embed_dim + i)]);
  }
  const size_t w1 = static_cast<size_t>(c.vocab_size * c.embed_dim);
  const size_t b1 = w1 + static_cast<size_t>(c.hidden) * x.size();
  const size_t w2 = b1 + static_cast<size_t>(c.hidden);
  const size_t b2 = w2 + static_cast<size_t>(c.vocab_size * c.hidden);
  std::vector<double> h(static_cast<size_t>(c.hidden));
  for (size_t k = 0; k < h.size(); ++k) {
    double s = th[b1 + k];
    for (size_t i = 0; i < x.size(); ++i) s += th[w1 + k * x.size() + i] * x[i];
    h[k] = std::tanh(s);
  }
  std::vector<double> logits(static_cast<size_t>(c.vocab_size));
  for (size_t v = 0; v < logits.size(); ++v) {
    double s = th[b2 + v];
    for (size_t k = 0; k < h.size(); ++k) s += th[w2 + v * h.size() + k] * h[k];
    logits[v] = s;
  }
  return logits;
}

// log softmax by explicit summation, no max shift.
double oracle_logprob(const std::vector<double>& logits, TokenId t) {
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  return std::log(std::exp(logits[static_cast<size_t>(t)]) / z);
}

TEST(Policy, ParameterCountAndLayout) {
  const PolicyConfig c;
  EXPECT_EQ(PolicyParams::parameter_count(c), 96u * 16 + 64u * 128 + 64 + 96u * 64 + 96);
  PolicyParams p(c);
  EXPECT_EQ(p.w1_offset(), 96u * 16);
  EXPECT_EQ(p.b2_offset() + 96, p.size());
  EXPECT_THROW(PolicyParams(PolicyConfig{600, 4, 2, 4}), InputError);
}

TEST(Policy, ZeroParamsGiveUniformLogits) {
  PolicyParams p(PolicyConfig{});
  const auto logits = forward_logits(p, std::vector<TokenId>{1, 5, 9, 12, 3, 3, 0, 2});
  for (double l : logits) EXPECT_EQ(l, logits[0]);
  const std::vector<TokenId> prompt = {1, 7};
  const std::vector<TokenId> comp = {8, 9, 2};
  for (double lp : sequence_logprob(p, prompt, comp)) EXPECT_NEAR(lp, -std::log(96.0), 1e-12);
}

TEST(Policy, IdenticalContextsGiveIdenticalLogits) {
  const auto p = PolicyParams::random(PolicyConfig{}, 1);
  const std::vector<TokenId> ctx = {0, 0, 1, 40, 41, 42, 3, 5};
  EXPECT_EQ(forward_logits(p, ctx), forward_logits(p, ctx));
}

TEST(Policy, SoftmaxSumsToOne) {
  const auto p = PolicyParams::random(PolicyConfig{}, 7);
  Rng rng(0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenId> ctx = trial == 0 ? std::vector<TokenId>(8, kPadToken) : random_tokens(rng, 8, 96, 0);
    const auto logits = forward_logits(p, ctx);
    double z = 0.0;
    for (double l : logits) z += std::exp(l);
    double total = 0.0;
    for (double l : logits) total += std::exp(l) / z;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Policy, ForwardMatchesOracle) {
  const auto p = PolicyParams::random(PolicyConfig{}, 3, 0.5);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ctx = random_tokens(rng, 8, 96, 0);
    const auto got = forward_logits(p, ctx);
    const auto want = oracle_logits(p, ctx);
    for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Policy, SequenceLogprobMatchesBruteForceSoftmax) {
  const auto p = PolicyParams::random(PolicyConfig{}, 9, 0.3);
  const std::vector<TokenId> prompt = {1, 20, 21};
  const std::vector<TokenId> comp = {30, 31, 2};
  const auto got = sequence_logprob(p, prompt, comp);
  std::vector<TokenId> hist = prompt;
  for (size_t t = 0; t < comp.size(); ++t) {
    const double want = oracle_logprob(oracle_logits(p, make_context(hist, 8)), comp[t]);
    EXPECT_NEAR(got[t], want, 1e-12);
    hist.push_back(comp[t]);
  }
}

TEST(Policy, MakeContextLeftPads) {
  const std::vector<TokenId> h = {5, 6};
  EXPECT_EQ(make_context(h, 4), (std::vector<TokenId>{0, 0, 5, 6}));
  const std::vector<TokenId> long_h = {1, 2, 3, 4, 5};
  EXPECT_EQ(make_context(long_h, 3), (std::vector<TokenId>{3, 4, 5}));
}

TEST(Policy, InvalidInputsThrow) {
  const auto p = PolicyParams::random(PolicyConfig{}, 1);
  const std::vector<TokenId> empty;
  const std::vector<TokenId> bad = {1, 96};
  const std::vector<TokenId> ok = {1};
  EXPECT_THROW(sample_completion(p, empty, {}, 0), InputError);
  EXPECT_THROW(sample_completion(p, bad, {}, 0), InputError);
  EXPECT_THROW(sequence_logprob(p, ok, bad), InputError);
  EXPECT_THROW(forward_logits(p, std::vector<TokenId>{1, 2}), InputError);
  const std::vector<TokenId> comp = {3};
  const std::vector<double> nan = {std::nan("")};
  EXPECT_THROW(backward_weighted_logprob(p, ok, comp, nan), InputError);
  const std::vector<double> two = {1.0, 1.0};
  EXPECT_THROW(backward_weighted_logprob(p, ok, comp, two), InputError);
}

TEST(Sampling, SameSeedSameRollout) {
  const auto p = PolicyParams::random(PolicyConfig{}, 4, 0.5);
  const std::vector<TokenId> prompt = {1, 10, 11};
  EXPECT_EQ(sample_completion(p, prompt, {}, 123), sample_completion(p, prompt, {}, 123));
}

TEST(Sampling, TopOneIsGreedy) {
  const auto p = PolicyParams::random(PolicyConfig{}, 5, 0.5);
  const std::vector<TokenId> prompt = {1, 12};
  DecodingConfig d;
  d.top_k = 1;
  d.max_len = 12;
  for (uint64_t s = 0; s < 5; ++s) {
    EXPECT_EQ(sample_completion(p, prompt, d, s).completion, greedy_completion(p, prompt, 12));
  }
  // Greedy picks the argmax at each step.
  const auto g = greedy_completion(p, prompt, 12);
  std::vector<TokenId> hist = prompt;
  for (TokenId t : g) {
    const auto logits = forward_logits(p, make_context(hist, 8));
    EXPECT_EQ(t, std::max_element(logits.begin(), logits.end()) - logits.begin());
    hist.push_back(t);
  }
}

TEST(Sampling, DifferentSeedsUsuallyDiffer) {
  const auto p = PolicyParams::random(PolicyConfig{}, 7, 0.3);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<TokenId> prompt = {1, static_cast<TokenId>(10 + i % 50)};
    const auto a = sample_completion(p, prompt, {}, mix_seed(static_cast<uint64_t>(i), 0));
    const auto b = sample_completion(p, prompt, {}, mix_seed(static_cast<uint64_t>(i), 1));
    if (a.completion != b.completion) ++differ;
  }
  EXPECT_GE(differ, 95);
}

TEST(Sampling, RolloutInvariants) {
  const auto p = PolicyParams::random(PolicyConfig{}, 8, 1.0);
  DecodingConfig d;
  d.max_len = 10;
  d.top_k = 96;
  for (uint64_t s = 0; s < 50; ++s) {
    const std::vector<TokenId> prompt = {1, 3, 50};
    const auto r = sample_completion(p, prompt, d, s);
    ASSERT_GE(r.completion.size(), 1u);
    ASSERT_LE(r.completion.size(), 10u);
    EXPECT_EQ(r.terminated, r.completion.back() == kEosToken);
    for (double lp : r.logprobs) EXPECT_LE(lp, 0.0);
    // Full vocabulary and temperature 1: stored values are full-softmax values.
    const auto again = sequence_logprob(p, prompt, r.completion);
    for (size_t t = 0; t < again.size(); ++t) EXPECT_NEAR(again[t], r.logprobs[t], 1e-9);
  }
}

TEST(Sampling, TokensRespectTopK) {
  const auto p = PolicyParams::random(PolicyConfig{}, 8, 1.0);
  DecodingConfig d;
  d.top_k = 5;
  d.max_len = 16;
  for (uint64_t s = 0; s < 30; ++s) {
    const std::vector<TokenId> prompt = {1, 44};
    const auto r = sample_completion(p, prompt, d, s);
    std::vector<TokenId> hist = prompt;
    for (TokenId t : r.completion) {
      const auto logits = forward_logits(p, make_context(hist, 8));
      int rank = 0;
      for (size_t i = 0; i < logits.size(); ++i) {
        if (logits[i] > logits[static_cast<size_t>(t)] ||
            (logits[i] == logits[static_cast<size_t>(t)] && static_cast<TokenId>(i) < t)) {
          ++rank;
        }
      }
      EXPECT_LT(rank, 5);
      hist.push_back(t);
    }
  }
}

TEST(Backward, ZeroCoefficientsGiveZeroGradient) {
  const auto p = PolicyParams::random(PolicyConfig{}, 2);
  const std::vector<TokenId> prompt = {1, 9};
  const std::vector<TokenId> comp = {10, 11, 12};
  const std::vector<double> g = {0.0, 0.0, 0.0};
  for (double x : backward_weighted_logprob(p, prompt, comp, g)) EXPECT_EQ(x, 0.0);
}

TEST(Backward, ClosedFormAtZeroParams) {
  // tanh(0) = 0 kills every path except the output bias, whose gradient is
  // onehot(t) - 1/V at uniform probabilities.
  PolicyParams p(PolicyConfig{});
  const std::vector<TokenId> prompt = {1};
  const std::vector<TokenId> comp = {17};
  const std::vector<double> g = {1.0};
  const auto grad = backward_weighted_logprob(p, prompt, comp, g);
  for (size_t i = 0; i < p.b2_offset(); ++i) ASSERT_EQ(grad[i], 0.0) << i;
  for (int v = 0; v < 96; ++v) {
    const double want = (v == 17 ? 1.0 : 0.0) - 1.0 / 96.0;
    EXPECT_NEAR(grad[p.b2_offset() + static_cast<size_t>(v)], want, 1e-15);
  }
}

TEST(Backward, MatchesFiniteDifferencesOnTwentyTriples) {
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = PolicyParams::random(tiny_config(), 3 + static_cast<uint64_t>(trial), 0.5);
    const auto prompt = random_tokens(rng, 2, 12, 1);
    const auto comp = random_tokens(rng, 1 + trial % 5, 12, 0);
    const auto g = random_vector(rng, comp.size());
    const auto analytic = backward_weighted_logprob(p, prompt, comp, g);
    const auto numeric = finite_difference_gradient(
        p,
        [&](const PolicyParams& q) {
          const auto lp = sequence_logprob(q, prompt, comp);
          return std::inner_product(lp.begin(), lp.end(), g.begin(), 0.0);
        },
        1e-5);
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Backward, DefaultConfigSampledCoordinates) {
  const auto p = PolicyParams::random(PolicyConfig{}, 3);
  const std::vector<TokenId> prompt = {1, 40, 41, 42};
  const std::vector<TokenId> comp = {5, 50, 6, 2};
  const std::vector<double> g = {0.3, -1.2, 0.7, 0.1};
  const auto analytic = backward_weighted_logprob(p, prompt, comp, g);
  Rng rng(4);
  std::vector<size_t> coords;
  for (int i = 0; i < 400; ++i) coords.push_back(static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(p.size()) - 1)));
  // Embedding rows of tokens that appear are the interesting ones.
  for (size_t i = 40 * 16; i < 43 * 16; ++i) coords.push_back(i);
  const auto numeric = finite_difference_gradient(
      p,
      [&](const PolicyParams& q) {
        const auto lp = sequence_logprob(q, prompt, comp);
        return std::inner_product(lp.begin(), lp.end(), g.begin(), 0.0);
      },
      1e-5, coords);
  std::vector<double> a, n;
  for (size_t i : coords) {
    a.push_back(analytic[i]);
    n.push_back(numeric[i]);
  }
  EXPECT_LT(max_relative_error(a, n), 1e-4);
}

TEST(FiniteDifference, QuadraticAndConstant) {
  auto p = PolicyParams::random(tiny_config(), 1);
  const auto quad = finite_difference_gradient(
      p,
      [](const PolicyParams& q) {
        double s = 0.0;
        for (double x : q.values()) s += 0.5 * x * x;
        return s;
      },
      1e-4);
  for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(quad[i], p[i], 1e-8);
  const auto flat = finite_difference_gradient(p, [](const PolicyParams&) { return 3.0; }, 1e-4);
  for (double x : flat) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(finite_difference_gradient(p, [](const PolicyParams&) { return 0.0; }, 0.0), InputError);
}

TEST(FiniteDifference, AgreesWithSequenceLogprobSum) {
  const auto p = PolicyParams::random(tiny_config(), 12, 0.5);
  const std::vector<TokenId> prompt = {1, 4};
  const std::vector<TokenId> comp = {5, 6, 2};
  const std::vector<double> ones = {1.0, 1.0, 1.0};
  const auto analytic = backward_weighted_logprob(p, prompt, comp, ones);
  const auto numeric = finite_difference_gradient(
      p,
      [&](const PolicyParams& q) {
        const auto lp = sequence_logprob(q, prompt, comp);
        return std::accumulate(lp.begin(), lp.end(), 0.0);
      },
      1e-5);
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-4);
}

TEST(Policy, EqualityIsBitwise) {
  auto a = PolicyParams::random(tiny_config(), 1);
  auto b = a;
  EXPECT_EQ(a, b);
  b[0] = std::nextafter(b[0], 1.0);
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(a.all_finite());
  b[1] = std::nan("");
  EXPECT_FALSE(b.all_finite());
}

}  // namespace
}  // namespace omnirl
