#include "omnirl/mtgrpo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "omnirl/errors.h"
#include "omnirl/rng.h"
#include "omnirl/taskgen.h"

namespace omnirl {
namespace {

constexpr uint64_t kRolloutStream = 0x726f6c6cULL;
constexpr uint64_t kDataStream = 0x64617461ULL;
constexpr uint64_t kMixStream = 0x6d697864ULL;

void check_finite(double x, const char* what, const RolloutGroup& g, size_t i, size_t t) {
  if (std::isfinite(x)) return;
  std::ostringstream os;
  os << "non-finite " << what << " (task " << task_name(g.task()) << ", rollout " << i << ", token " << t
     << ", prompt \"" << g.instance.prompt << "\")";
  throw NumericError(os.str());
}

// Cycles through one task's train split in a fresh shuffled order each pass.
class DataCursor {
 public:
  DataCursor(const std::vector<PromptInstance>* data, uint64_t seed) : data_(data), seed_(seed) { reshuffle(); }

  const PromptInstance& next() {
    if (pos_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    return (*data_)[order_[pos_++]];
  }
  bool exhausted(int max_epochs) const {
    return max_epochs > 0 && epoch_ + 1 >= max_epochs && pos_ == order_.size();
  }

 private:
  void reshuffle() {
    order_.resize(data_->size());
    std::iota(order_.begin(), order_.end(), size_t{0});
    Rng rng(mix_seed(seed_, static_cast<uint64_t>(epoch_)));
    shuffle(order_, rng);
    pos_ = 0;
  }

  const std::vector<PromptInstance>* data_;
  uint64_t seed_;
  std::vector<size_t> order_;
  size_t pos_ = 0;
  int epoch_ = 0;
};

}  // namespace

double TrainConfig::beta_for(TaskId t) const {
  const auto it = beta.find(t);
  return it == beta.end() ? 0.0 : it->second;
}

verifiers::RewardWeights TrainConfig::weights_for(TaskId t) const {
  const auto it = reward_weights.find(t);
  return it == reward_weights.end() ? verifiers::RewardWeights{} : it->second;
}

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("group_size must be >= 2");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must lie in (0, 1)");
  for (const auto& [t, b] : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("beta must be finite and >= 0");
  }
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (inner_epochs < 1 || inner_epochs > 4) throw ConfigError("inner_epochs must lie in [1, 4]");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (!(decoding.temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (decoding.top_k < 1) throw ConfigError("top_k must be >= 1");
  if (decoding.max_len < 1) throw ConfigError("max_len must be >= 1");
  for (const auto& [t, w] : reward_weights) {
    for (const auto& v : {w.primary, w.format, w.tags}) {
      if (v && !(*v >= 0.0 && *v <= 1.0)) throw ConfigError("reward weights must lie in [0, 1]");
    }
  }
}

int RolloutGroup::valid_count() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), true));
}

std::vector<double> normalize_advantages(std::span<const double> rewards, const std::vector<bool>& valid,
                                         double sigma_floor) {
  if (rewards.size() != valid.size()) throw InputError("rewards and mask differ in length");
  double n = 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < rewards.size(); ++i) {
    if (!valid[i]) continue;
    n += 1.0;
    sum += rewards[i];
  }
  if (n == 0.0) throw InputError("normalize_advantages: no valid rewards");
  const double mean = sum / n;
  double var = 0.0;
  for (size_t i = 0; i < rewards.size(); ++i) {
    if (valid[i]) var += (rewards[i] - mean) * (rewards[i] - mean);
  }
  const double sigma = std::sqrt(var / n);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sigma < sigma_floor) return adv;
  for (size_t i = 0; i < rewards.size(); ++i) {
    if (valid[i]) adv[i] = (rewards[i] - mean) / sigma;
  }
  return adv;
}

double policy_ratio(double logprob_new, double logprob_old) { return std::exp(logprob_new - logprob_old); }

double clipped_term(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

bool clip_binds(double ratio, double advantage, double eps) {
  return (advantage > 0.0 && ratio > 1.0 + eps) || (advantage < 0.0 && ratio < 1.0 - eps);
}

double kl_estimate(double logprob_ref, double logprob_new) {
  const double log_r = logprob_ref - logprob_new;
  // expm1 keeps precision near r = 1, where the estimator is second order.
  return std::max(0.0, std::expm1(log_r) - log_r);
}

RolloutGroup collect_group(const PolicyParams& policy, const Vocabulary& vocab,
                           const PromptInstance& instance, const TrainConfig& config,
                           judge::Judge& judge, uint64_t seed) {
  if (config.group_size < 2) throw InputError("group size must be >= 2");
  RolloutGroup g;
  g.instance = instance;
  const auto prompt = taskgen::encode_prompt(vocab, instance);
  std::vector<std::string> texts;
  for (int i = 0; i < config.group_size; ++i) {
    g.rollouts.push_back(sample_completion(policy, prompt, config.decoding, mix_seed(seed, static_cast<uint64_t>(i))));
    texts.push_back(vocab.decode(g.rollouts.back().completion));
  }
  g.rewards = verifiers::score_outputs(instance, texts, config.weights_for(instance.task), judge);
  std::vector<double> totals;
  for (const auto& r : g.rewards) {
    g.valid.push_back(r.valid);
    totals.push_back(r.valid ? r.total : 0.0);
  }
  if (g.valid_count() == 0) {
    g.skip = true;
    g.advantages.assign(totals.size(), 0.0);
    return g;
  }
  g.advantages = normalize_advantages(totals, g.valid, config.sigma_floor);
  return g;
}

GroupLoss group_loss_and_grad(const PolicyParams& params, const PolicyParams& old_params,
                              const PolicyParams& ref_params, const Vocabulary& vocab,
                              const RolloutGroup& group, double beta, double eps) {
  (void)vocab;
  if (group.skip) throw InputError("group_loss_and_grad: group is flagged skip");
  const int n_valid = group.valid_count();
  if (n_valid == 0) throw InputError("group_loss_and_grad: no valid rollouts");
  GroupLoss out;
  out.grad.assign(params.size(), 0.0);
  const double inv_g = 1.0 / n_valid;
  for (size_t i = 0; i < group.rollouts.size(); ++i) {
    if (!group.valid[i]) continue;
    const Rollout& r = group.rollouts[i];
    const auto lp = sequence_logprob(params, r.prompt, r.completion);
    const auto lp_old = &old_params == &params ? lp : sequence_logprob(old_params, r.prompt, r.completion);
    const auto lp_ref = &ref_params == &params ? lp : sequence_logprob(ref_params, r.prompt, r.completion);
    const double a = group.advantages[i];
    const double scale = inv_g / static_cast<double>(r.completion.size());
    std::vector<double> coeffs(r.completion.size());
    for (size_t t = 0; t < r.completion.size(); ++t) {
      const double rho = policy_ratio(lp[t], lp_old[t]);
      const double kl = kl_estimate(lp_ref[t], lp[t]);
      const double r_ref = std::exp(lp_ref[t] - lp[t]);
      check_finite(rho, "policy ratio", group, i, t);
      check_finite(r_ref, "reference ratio", group, i, t);
      const bool binds = clip_binds(rho, a, eps);
      const double surrogate = clipped_term(rho, a, eps);
      out.loss -= scale * (surrogate - beta * kl);
      // d(surrogate)/d(lambda) is rho * A on the unclipped branch, 0 otherwise;
      // d(kl)/d(lambda) = 1 - r.
      const double dsur = binds ? 0.0 : rho * a;
      coeffs[t] = -scale * (dsur - beta * (1.0 - r_ref));
      check_finite(coeffs[t], "loss coefficient", group, i, t);
      out.kl_sum += kl;
      out.tokens += 1;
      out.clipped_tokens += binds ? 1 : 0;
    }
    accumulate_weighted_logprob_grad(params, r.prompt, r.completion, coeffs, out.grad);
  }
  if (!std::isfinite(out.loss)) throw NumericError("non-finite group loss for task " + std::string(task_name(group.task())));
  return out;
}

UpdateStats update_policy(PolicyParams& params, OptimizerState& state, std::span<const RolloutGroup> groups,
                          const PolicyParams& ref_params, const Vocabulary& vocab, const TrainConfig& config) {
  UpdateStats stats;
  std::map<TaskId, std::vector<const RolloutGroup*>> by_task;
  for (const auto& g : groups) {
    if (g.skip) {
      ++stats.skipped_groups;
    } else {
      by_task[g.task()].push_back(&g);
    }
  }
  if (by_task.empty()) return stats;

  const PolicyParams old_params = params;
  const double task_weight = 1.0 / static_cast<double>(by_task.size());
  for (int epoch = 0; epoch < config.inner_epochs; ++epoch) {
    std::vector<double> grad(params.size(), 0.0);
    double loss = 0.0;
    double kl = 0.0;
    int64_t tokens = 0;
    int64_t clipped = 0;
    for (const auto& [task, members] : by_task) {
      const double w = task_weight / static_cast<double>(members.size());
      const double beta = config.beta_for(task);
      for (const RolloutGroup* g : members) {
        const GroupLoss gl = epoch == 0 ? group_loss_and_grad(params, params, ref_params, vocab, *g, beta, config.clip_eps)
                                        : group_loss_and_grad(params, old_params, ref_params, vocab, *g, beta, config.clip_eps);
        loss += w * gl.loss;
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += w * gl.grad[k];
        kl += gl.kl_sum;
        tokens += gl.tokens;
        clipped += gl.clipped_tokens;
      }
    }
    if (epoch == 0) {
      stats.loss = loss;
      stats.mean_kl = tokens ? kl / static_cast<double>(tokens) : 0.0;
    }
    stats.clip_fraction = tokens ? static_cast<double>(clipped) / static_cast<double>(tokens) : 0.0;
    adamw_step(params.values(), grad, state, config.learning_rate, config.adamw);
  }
  if (!params.all_finite()) throw NumericError("parameters became non-finite after an update");
  stats.applied = true;
  return stats;
}

nlohmann::json metrics_to_json(const StepMetrics& m) {
  return {{"step", m.step},
          {"stage", m.stage},
          {"task", m.task},
          {"mean_reward", m.mean_reward},
          {"loss", m.loss},
          {"mean_kl", m.mean_kl},
          {"clip_fraction", m.clip_fraction},
          {"skipped_groups", m.skipped_groups}};
}

TrainResult train(const PolicyParams& initial, const Vocabulary& vocab,
                  const std::map<TaskId, std::vector<PromptInstance>>& datasets,
                  const TaskDistribution& schedule, const TrainConfig& config, judge::Judge& judge,
                  const TrainHooks& hooks) {
  config.validate();
  schedule.validate();
  if (initial.config().vocab_size != vocab.size()) throw InputError("policy and vocabulary sizes differ");
  std::map<TaskId, DataCursor> cursors;
  for (TaskId t : schedule.tasks) {
    const auto it = datasets.find(t);
    if (it == datasets.end() || it->second.empty()) {
      throw InputError("no training data for task " + std::string(task_name(t)));
    }
    cursors.emplace(t, DataCursor(&it->second, mix_seed(mix_seed(config.seed, kDataStream), static_cast<uint64_t>(t))));
  }
  const auto steps = materialize(schedule, config.seed);

  TrainResult result{initial, OptimizerState(initial.size(), config.weight_decay), {}};
  PolicyParams ref = initial;
  PolicyParams& params = result.params;
  int stage = -1;
  for (size_t s = 0; s < steps.size(); ++s) {
    const ScheduledStep& entry = steps[s];
    if (entry.stage != stage) {
      stage = entry.stage;
      if (config.ref_policy == RefPolicy::kStageStart) ref = params;
      if (config.reset_optimizer_between_stages && s > 0) result.optimizer = OptimizerState(params.size(), config.weight_decay);
      if (hooks.on_stage) hooks.on_stage(stage, entry.task);
    }

    std::vector<TaskId> prompt_tasks(static_cast<size_t>(config.batch_size), entry.task);
    const bool mixed = config.mixed_batches && !schedule.staged();
    if (mixed) {
      JointSampler sampler(schedule.tasks, schedule.weights, mix_seed(mix_seed(config.seed, kMixStream), s));
      for (auto& t : prompt_tasks) t = sampler.next();
    }
    bool exhausted = false;
    for (TaskId t : prompt_tasks) exhausted = exhausted || cursors.at(t).exhausted(config.max_epochs);
    if (exhausted) break;

    std::vector<RolloutGroup> groups;
    for (size_t b = 0; b < prompt_tasks.size(); ++b) {
      const PromptInstance& inst = cursors.at(prompt_tasks[b]).next();
      const uint64_t seed = mix_seed(mix_seed(config.seed, kRolloutStream), s * prompt_tasks.size() + b);
      groups.push_back(collect_group(params, vocab, inst, config, judge, seed));
    }

    const UpdateStats u = update_policy(params, result.optimizer, groups, ref, vocab, config);
    StepMetrics m;
    m.step = static_cast<int64_t>(s);
    m.stage = stage;
    m.task = mixed ? "mixed" : std::string(task_name(entry.task));
    double reward_sum = 0.0;
    int reward_n = 0;
    for (const auto& g : groups) {
      for (size_t i = 0; i < g.rewards.size(); ++i) {
        if (!g.valid[i]) continue;
        reward_sum += g.rewards[i].total;
        ++reward_n;
      }
    }
    m.mean_reward = reward_n ? reward_sum / reward_n : 0.0;
    m.loss = u.loss;
    m.mean_kl = u.mean_kl;
    m.clip_fraction = u.clip_fraction;
    m.skipped_groups = u.skipped_groups;
    result.metrics.push_back(m);
    if (hooks.on_step) hooks.on_step(m, params);
  }
  return result;
}

}  // namespace omnirl
