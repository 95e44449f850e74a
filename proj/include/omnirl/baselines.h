#ifndef OMNIRL_BASELINES_H_
#define OMNIRL_BASELINES_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnirl/adamw.h"
#include "omnirl/judge.h"
#include "omnirl/policy.h"
#include "omnirl/task.h"
#include "omnirl/vocabulary.h"

namespace omnirl {

struct RftExample {
  PromptInstance instance;
  std::string completion;  // decoded text
  double accepted_reward = 0.0;
};

struct RftDataset {
  std::vector<RftExample> examples;
  int dropped = 0;  // prompts with no accepted sample
};

// Primary reward of an output; the default uses the task verifiers.
using PrimaryScorer = std::function<std::optional<double>(const PromptInstance&, const std::string&)>;

struct RftConfig {
  int samples_per_prompt = 16;
  DecodingConfig decoding;
  uint64_t seed = 0;
};

// Keeps the first sample per prompt whose primary reward is 1 (for writing:
// the judge preferred it over the reference).
RftDataset rejection_sample(const PolicyParams& policy, const Vocabulary& vocab,
                            std::span<const PromptInstance> instances, const RftConfig& config,
                            const PrimaryScorer& scorer);
RftDataset rejection_sample(const PolicyParams& policy, const Vocabulary& vocab,
                            std::span<const PromptInstance> instances, const RftConfig& config,
                            judge::Judge& judge);

// omnirl-data-v1 lines with extra "completion" and "accepted_reward" fields.
void write_rft_dataset(std::ostream& out, const RftDataset& data);
RftDataset read_rft_dataset(std::istream& in);

struct SftExample {
  std::vector<TokenId> prompt;
  std::vector<TokenId> completion;
};

// Completion tokens for an RFT example: encoded text followed by EOS.
SftExample sft_example(const Vocabulary& vocab, const RftExample& ex);

// Mean per-token negative log-likelihood over all completion tokens in the
// batch, and its gradient.
double sft_loss_and_grad(const PolicyParams& params, std::span<const SftExample> batch, std::vector<double>* grad);

// One AdamW step on the mean per-token NLL. Returns the loss before the step.
double sft_step(PolicyParams& params, std::span<const SftExample> batch, double lr, OptimizerState& state,
                const AdamWConfig& adamw = {});

// Supervised warm start on the output layout alone. Targets are
// "<think></think><answer>" + random characters + "</answer>" + EOS, so the
// policy learns the tags without learning any task. Stands in for the
// instruction-following base model that RL normally starts from.
struct FormatWarmStart {
  int steps = 300;
  int batch = 8;
  double learning_rate = 1e-2;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  int answer_len_min = 1;
  int answer_len_max = 2;
  uint64_t seed = 0;
};

PolicyParams format_warm_start(const PolicyParams& init, const Vocabulary& vocab,
                               std::span<const PromptInstance> prompts, const FormatWarmStart& config);

// TIES merge of task vectors relative to `base`: trim each delta to its top
// ceil(density * n) magnitudes, elect a per-coordinate sign from the summed
// trimmed deltas, average the agreeing entries, and return base + lambda *
// merged delta.
PolicyParams ties_merge(const PolicyParams& base, std::span<const PolicyParams> models, double density = 0.2,
                        double lambda = 1.0);

}  // namespace omnirl

#endif  // OMNIRL_BASELINES_H_
