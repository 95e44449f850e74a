#ifndef OMNIRL_MTGRPO_H_
#define OMNIRL_MTGRPO_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnirl/adamw.h"
#include "omnirl/judge.h"
#include "omnirl/policy.h"
#include "omnirl/scheduler.h"
#include "omnirl/task.h"
#include "omnirl/verifiers.h"
#include "omnirl/vocabulary.h"

namespace omnirl {

// Which snapshot the KL term regularizes toward.
enum class RefPolicy { kStageStart, kTrainStart };

struct TrainConfig {
  int group_size = 16;
  double clip_eps = 0.2;
  std::map<TaskId, double> beta = {
      {TaskId::kCode, 0.001}, {TaskId::kMath, 0.04}, {TaskId::kQa, 0.04}, {TaskId::kWriting, 0.0}};
  double sigma_floor = 1e-8;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  AdamWConfig adamw;
  int batch_size = 8;     // prompts per optimizer step
  int inner_epochs = 1;   // optimizer updates per rollout batch, <= 4
  int max_epochs = 0;     // passes over a task's train split; 0 = unlimited
  bool mixed_batches = false;  // joint mode: draw a task per prompt
  bool reset_optimizer_between_stages = false;
  RefPolicy ref_policy = RefPolicy::kStageStart;
  uint64_t seed = 0;
  DecodingConfig decoding;
  std::map<TaskId, verifiers::RewardWeights> reward_weights;  // missing task = defaults

  double beta_for(TaskId t) const;
  verifiers::RewardWeights weights_for(TaskId t) const;
  // Throws ConfigError on violated invariants.
  void validate() const;
};

struct RolloutGroup {
  PromptInstance instance;
  std::vector<Rollout> rollouts;
  std::vector<verifiers::RewardBreakdown> rewards;
  std::vector<double> advantages;  // 0 for invalid rollouts
  std::vector<bool> valid;
  bool skip = false;  // no valid rollout

  TaskId task() const { return instance.task; }
  int valid_count() const;
};

// Population-std normalization over the valid entries. Invalid entries get 0.
// Throws InputError when nothing is valid.
std::vector<double> normalize_advantages(std::span<const double> rewards, const std::vector<bool>& valid,
                                         double sigma_floor = 1e-8);

double policy_ratio(double logprob_new, double logprob_old);
double clipped_term(double ratio, double advantage, double eps);
// True when the clipped product is the smaller one and differs from the
// unclipped product, so the surrogate has zero slope in the ratio.
bool clip_binds(double ratio, double advantage, double eps);
// k3 estimator r - ln r - 1 with r = pi_ref / pi_theta.
double kl_estimate(double logprob_ref, double logprob_new);

// Samples G completions for `instance` from `policy` and scores them.
RolloutGroup collect_group(const PolicyParams& policy, const Vocabulary& vocab,
                           const PromptInstance& instance, const TrainConfig& config,
                           judge::Judge& judge, uint64_t seed);

struct GroupLoss {
  double loss = 0.0;
  std::vector<double> grad;
  double kl_sum = 0.0;
  int64_t tokens = 0;
  int64_t clipped_tokens = 0;
};

// Negated clipped surrogate with KL penalty, averaged per token then over the
// valid rollouts, evaluated at `params`. Ratios use full-softmax
// log-probabilities recomputed under `old_params`.
GroupLoss group_loss_and_grad(const PolicyParams& params, const PolicyParams& old_params,
                              const PolicyParams& ref_params, const Vocabulary& vocab,
                              const RolloutGroup& group, double beta, double eps);

struct UpdateStats {
  double loss = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  int skipped_groups = 0;
  bool applied = false;
};

// Runs config.inner_epochs AdamW updates on the non-skipped groups with
// pi_old = params at entry. Losses are averaged per task first, then across
// tasks. If every group is skipped nothing is touched.
UpdateStats update_policy(PolicyParams& params, OptimizerState& state, std::span<const RolloutGroup> groups,
                          const PolicyParams& ref_params, const Vocabulary& vocab, const TrainConfig& config);

struct StepMetrics {
  int64_t step = 0;
  int stage = 0;
  std::string task;  // task name, or "mixed"
  double mean_reward = 0.0;
  double loss = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  int skipped_groups = 0;
};

nlohmann::json metrics_to_json(const StepMetrics& m);

struct TrainHooks {
  // Called after every optimizer step (including steps where all groups were
  // skipped).
  std::function<void(const StepMetrics&, const PolicyParams&)> on_step;
  std::function<void(int stage, TaskId task)> on_stage;
};

struct TrainResult {
  PolicyParams params;
  OptimizerState optimizer;
  std::vector<StepMetrics> metrics;
};

TrainResult train(const PolicyParams& initial, const Vocabulary& vocab,
                  const std::map<TaskId, std::vector<PromptInstance>>& datasets,
                  const TaskDistribution& schedule, const TrainConfig& config, judge::Judge& judge,
                  const TrainHooks& hooks = {});

}  // namespace omnirl

#endif  // OMNIRL_MTGRPO_H_
