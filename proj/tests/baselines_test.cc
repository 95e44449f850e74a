#include "omnirl/baselines.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "omnirl/errors.h"
#include "omnirl/taskgen.h"
#include "omnirl/verifiers.h"
#include "test_util.h"

namespace omnirl {
namespace {

using testing::max_relative_error;
using testing::random_tokens;
using testing::tiny_config;

std::vector<PromptInstance> math_prompts(int n) {
  taskgen::TaskSpec s;
  s.task = TaskId::kMath;
  s.seed = 11;
  return taskgen::generate(s, n, Split::kTrain);
}

// --- Rejection sampling ------------------------------------------------------

TEST(Rft, AlwaysCorrectScorerKeepsEveryPrompt) {
  const auto vocab = Vocabulary::standard();
  const auto p = PolicyParams::random(PolicyConfig{}, 1);
  const auto prompts = math_prompts(12);
  RftConfig cfg;
  cfg.samples_per_prompt = 4;
  const auto data = rejection_sample(p, vocab, prompts, cfg, [](const PromptInstance&, const std::string&) {
    return std::optional<double>(1.0);
  });
  ASSERT_EQ(data.examples.size(), prompts.size());
  EXPECT_EQ(data.dropped, 0);
  for (size_t i = 0; i < prompts.size(); ++i) EXPECT_EQ(data.examples[i].instance, prompts[i]);
}

TEST(Rft, NeverCorrectScorerDropsEveryPrompt) {
  const auto vocab = Vocabulary::standard();
  const auto p = PolicyParams::random(PolicyConfig{}, 1);
  const auto prompts = math_prompts(9);
  RftConfig cfg;
  cfg.samples_per_prompt = 3;
  int calls = 0;
  const auto data = rejection_sample(p, vocab, prompts, cfg, [&](const PromptInstance&, const std::string&) {
    ++calls;
    return std::optional<double>(0.0);
  });
  EXPECT_TRUE(data.examples.empty());
  EXPECT_EQ(data.dropped, 9);
  EXPECT_EQ(calls, 27);
}

TEST(Rft, PlantedSolvablePromptsAreExactlyKept) {
  const auto vocab = Vocabulary::standard();
  const auto p = PolicyParams::random(PolicyConfig{}, 2);
  const auto prompts = math_prompts(20);
  std::set<std::string> solvable;
  for (size_t i = 0; i < prompts.size(); i += 3) solvable.insert(prompts[i].prompt);
  RftConfig cfg;
  cfg.samples_per_prompt = 2;
  const auto data = rejection_sample(p, vocab, prompts, cfg, [&](const PromptInstance& inst, const std::string&) {
    return std::optional<double>(solvable.count(inst.prompt) ? 1.0 : 0.0);
  });
  std::set<std::string> kept;
  for (const auto& ex : data.examples) kept.insert(ex.instance.prompt);
  EXPECT_EQ(kept, solvable);
  EXPECT_EQ(data.dropped, static_cast<int>(prompts.size() - solvable.size()));
}

TEST(Rft, AcceptedPairsReverify) {
  // The scorer depends on the sampled text, so acceptance is a real filter.
  const auto vocab = Vocabulary::standard();
  const auto p = PolicyParams::random(PolicyConfig{}, 3);
  const auto prompts = math_prompts(30);
  auto scorer = [](const PromptInstance&, const std::string& text) {
    return std::optional<double>(text.size() % 3 == 0 ? 1.0 : 0.0);
  };
  RftConfig cfg;
  cfg.samples_per_prompt = 4;
  const auto data = rejection_sample(p, vocab, prompts, cfg, scorer);
  EXPECT_GT(data.examples.size(), 0u);
  EXPECT_GT(data.dropped, 0);
  for (const auto& ex : data.examples) {
    EXPECT_EQ(ex.accepted_reward, 1.0);
    EXPECT_EQ(*scorer(ex.instance, ex.completion), 1.0);
  }
  // Same seed, same dataset.
  const auto again = rejection_sample(p, vocab, prompts, cfg, scorer);
  ASSERT_EQ(again.examples.size(), data.examples.size());
  for (size_t i = 0; i < data.examples.size(); ++i) EXPECT_EQ(again.examples[i].completion, data.examples[i].completion);
}

TEST(Rft, VerifierPathOnlyKeepsCorrectAnswers) {
  const auto vocab = Vocabulary::standard();
  const auto p = PolicyParams::random(PolicyConfig{}, 5);
  const auto prompts = math_prompts(10);
  judge::OracleJudge j;
  RftConfig cfg;
  cfg.samples_per_prompt = 2;
  const auto data = rejection_sample(p, vocab, prompts, cfg, j);
  EXPECT_EQ(static_cast<int>(data.examples.size()) + data.dropped, 10);
  for (const auto& ex : data.examples) EXPECT_EQ(verifiers::primary_reward(ex.instance, ex.completion, j), 1.0);
}

TEST(Rft, DatasetRoundTrip) {
  RftDataset d;
  for (const auto& inst : math_prompts(5)) d.examples.push_back({inst, taskgen::reference_output(inst), 1.0});
  std::stringstream ss;
  write_rft_dataset(ss, d);
  const auto back = read_rft_dataset(ss);
  ASSERT_EQ(back.examples.size(), d.examples.size());
  for (size_t i = 0; i < d.examples.size(); ++i) {
    EXPECT_EQ(back.examples[i].instance, d.examples[i].instance);
    EXPECT_EQ(back.examples[i].completion, d.examples[i].completion);
    EXPECT_EQ(back.examples[i].accepted_reward, 1.0);
  }
  std::stringstream bad("{\"schema\":\"omnirl-data-v1\"}\n");
  EXPECT_THROW(read_rft_dataset(bad), FormatError);
}

// --- SFT ---------------------------------------------------------------------

std::vector<SftExample> random_batch(Rng& rng, int n, int vocab) {
  std::vector<SftExample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({random_tokens(rng, 1 + static_cast<int>(rng.uniform_int(0, 4)), vocab),
                   random_tokens(rng, 1 + static_cast<int>(rng.uniform_int(0, 5)), vocab)});
  }
  return out;
}

TEST(Sft, GradientMatchesFiniteDifference) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = PolicyParams::random(tiny_config(), 100 + trial, 0.5);
    const auto batch = random_batch(rng, 3, tiny_config().vocab_size);
    std::vector<double> grad;
    sft_loss_and_grad(p, batch, &grad);
    const auto numeric = finite_difference_gradient(
        p, [&](const PolicyParams& q) { return sft_loss_and_grad(q, batch, nullptr); }, 1e-5);
    EXPECT_LT(max_relative_error(grad, numeric), 1e-4);
  }
}

TEST(Sft, LossIsMeanTokenNll) {
  const auto p = PolicyParams::random(tiny_config(), 4, 0.5);
  const SftExample a{{3, 4}, {5, 6, 7}};
  const SftExample b{{8}, {9}};
  const std::vector<SftExample> batch{a, b};
  const auto la = sequence_logprob(p, a.prompt, a.completion);
  const auto lb = sequence_logprob(p, b.prompt, b.completion);
  const double want = -(std::accumulate(la.begin(), la.end(), 0.0) + lb[0]) / 4.0;
  EXPECT_NEAR(sft_loss_and_grad(p, batch, nullptr), want, 1e-12);
}

TEST(Sft, ZeroLearningRateLeavesParamsUnchanged) {
  Rng rng(2);
  auto p = PolicyParams::random(tiny_config(), 6);
  const auto before = p;
  OptimizerState st(p.size());
  const auto batch = random_batch(rng, 4, tiny_config().vocab_size);
  sft_step(p, batch, 0.0, st);
  EXPECT_EQ(p, before);
}

TEST(Sft, MemorizesSmallSet) {
  const auto vocab = Vocabulary::standard();
  const auto prompts = math_prompts(4);
  std::vector<SftExample> batch;
  for (const auto& inst : prompts) batch.push_back(sft_example(vocab, {inst, taskgen::reference_output(inst), 1.0}));
  auto p = PolicyParams::random(PolicyConfig{}, 7);
  OptimizerState st(p.size());
  const double first = sft_loss_and_grad(p, batch, nullptr);
  for (int i = 0; i < 500; ++i) sft_step(p, batch, 1e-2, st);
  const double last = sft_loss_and_grad(p, batch, nullptr);
  EXPECT_GT(first, 1.0);
  EXPECT_LT(last, 0.1);
}

TEST(Sft, ExampleEndsWithEos) {
  const auto vocab = Vocabulary::standard();
  const auto inst = math_prompts(1)[0];
  const auto ex = sft_example(vocab, {inst, "<answer>1</answer>", 1.0});
  ASSERT_FALSE(ex.completion.empty());
  EXPECT_EQ(ex.completion.back(), vocab.eos());
  EXPECT_EQ(ex.prompt, taskgen::encode_prompt(vocab, inst));
}

TEST(WarmStart, TeachesTheFormatNotTheTask) {
  const auto vocab = Vocabulary::standard();
  const auto prompts = math_prompts(32);
  FormatWarmStart cfg;
  cfg.steps = 200;
  const auto p = format_warm_start(PolicyParams::random(PolicyConfig{}, 1), vocab, prompts, cfg);
  int formatted = 0;
  for (const auto& inst : prompts) {
    const auto out = greedy_completion(p, taskgen::encode_prompt(vocab, inst), 16);
    formatted += verifiers::r_format(vocab.decode(out)) == 1.0 ? 1 : 0;
  }
  EXPECT_GE(formatted, 28);
}

// --- TIES merge --------------------------------------------------------------

// Straightforward reimplementation: full sort for the trim, then sign
// election and disjoint mean per coordinate.
std::vector<double> ties_oracle(const std::vector<double>& base, const std::vector<std::vector<double>>& models,
                                double density, double lambda) {
  const size_t n = base.size();
  const size_t keep = std::min(n, static_cast<size_t>(std::ceil(density * static_cast<double>(n))));
  std::vector<std::vector<double>> deltas;
  for (const auto& m : models) {
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = m[i] - base[i];
    std::vector<double> mags(n);
    for (size_t i = 0; i < n; ++i) mags[i] = std::abs(d[i]);
    std::sort(mags.rbegin(), mags.rend());
    const double cutoff = mags[keep - 1];
    for (auto& x : d) {
      if (std::abs(x) < cutoff) x = 0.0;
    }
    deltas.push_back(d);
  }
  std::vector<double> out = base;
  for (size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (const auto& d : deltas) total += d[i];
    double sum = 0.0;
    int count = 0;
    for (const auto& d : deltas) {
      if (d[i] != 0.0 && (d[i] > 0.0) == (total > 0.0)) {
        sum += d[i];
        ++count;
      }
    }
    if (total != 0.0 && count > 0) out[i] = base[i] + lambda * sum / count;
  }
  return out;
}

std::vector<double> to_vec(const PolicyParams& p) { return {p.values().begin(), p.values().end()}; }

TEST(Ties, MatchesOracleOnRandomInputs) {
  const auto cfg = tiny_config();
  for (int trial = 0; trial < 30; ++trial) {
    const auto base = PolicyParams::random(cfg, 1000 + trial);
    std::vector<PolicyParams> models;
    std::vector<std::vector<double>> raw;
    for (int k = 0; k < 1 + trial % 4; ++k) {
      models.push_back(PolicyParams::random(cfg, 2000 + 10 * trial + k, 0.5));
      raw.push_back(to_vec(models.back()));
    }
    if (models.size() == 1) continue;  // the single-model path is checked separately
    const double density = 0.1 + 0.3 * (trial % 3);
    const double lambda = trial % 2 ? 1.0 : 0.7;
    const auto got = ties_merge(base, models, density, lambda);
    const auto want = ties_oracle(to_vec(base), raw, density, lambda);
    for (size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-12) << "trial " << trial << " i " << i;
  }
}

TEST(Ties, SingleAndIdenticalModelsReturnThemselves) {
  const auto base = PolicyParams::random(tiny_config(), 1);
  const auto m = PolicyParams::random(tiny_config(), 2);
  const std::vector<PolicyParams> one{m};
  EXPECT_EQ(ties_merge(base, one), m);
  const std::vector<PolicyParams> three{m, m, m};
  EXPECT_EQ(ties_merge(base, three), m);
}

TEST(Ties, SignElectionDropsTheMinority) {
  PolicyParams base(tiny_config());
  auto a = base, b = base;
  a[0] = 3.0;
  b[0] = -1.0;
  const std::vector<PolicyParams> models{a, b};
  const auto merged = ties_merge(base, models, 1.0, 1.0);
  EXPECT_EQ(merged[0], 3.0);
  for (size_t i = 1; i < merged.size(); ++i) EXPECT_EQ(merged[i], 0.0);
}

TEST(Ties, ZeroLambdaReturnsBase) {
  const auto base = PolicyParams::random(tiny_config(), 1);
  const std::vector<PolicyParams> models{PolicyParams::random(tiny_config(), 2), PolicyParams::random(tiny_config(), 3)};
  EXPECT_EQ(ties_merge(base, models, 0.2, 0.0), base);
}

TEST(Ties, PermutationInvariant) {
  const auto base = PolicyParams::random(tiny_config(), 1);
  std::vector<PolicyParams> models;
  for (int k = 0; k < 4; ++k) models.push_back(PolicyParams::random(tiny_config(), 10 + k));
  const auto ref = ties_merge(base, models);
  std::vector<int> idx{0, 1, 2, 3};
  while (std::next_permutation(idx.begin(), idx.end())) {
    std::vector<PolicyParams> perm;
    for (int i : idx) perm.push_back(models[static_cast<size_t>(i)]);
    EXPECT_EQ(ties_merge(base, perm), ref);
  }
}

TEST(Ties, RejectsBadInputs) {
  const auto base = PolicyParams::random(tiny_config(), 1);
  const std::vector<PolicyParams> other{PolicyParams::random(PolicyConfig{}, 2)};
  EXPECT_THROW(ties_merge(base, other), InputError);
  EXPECT_THROW(ties_merge(base, std::vector<PolicyParams>{}), InputError);
  const std::vector<PolicyParams> ok{base};
  EXPECT_THROW(ties_merge(base, ok, 0.0), InputError);
}

}  // namespace
}  // namespace omnirl
