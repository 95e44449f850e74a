#include "omnirl/baselines.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "omnirl/errors.h"
#include "omnirl/rng.h"
#include "omnirl/taskgen.h"
#include "omnirl/verifiers.h"

namespace omnirl {

RftDataset rejection_sample(const PolicyParams& policy, const Vocabulary& vocab,
                            std::span<const PromptInstance> instances, const RftConfig& config,
                            const PrimaryScorer& scorer) {
  if (config.samples_per_prompt < 1) throw InputError("samples_per_prompt must be >= 1");
  RftDataset out;
  for (size_t p = 0; p < instances.size(); ++p) {
    const PromptInstance& inst = instances[p];
    const auto prompt = taskgen::encode_prompt(vocab, inst);
    bool accepted = false;
    for (int s = 0; s < config.samples_per_prompt && !accepted; ++s) {
      const uint64_t seed = mix_seed(mix_seed(config.seed, p), static_cast<uint64_t>(s));
      const Rollout r = sample_completion(policy, prompt, config.decoding, seed);
      const std::string text = vocab.decode(r.completion);
      const auto reward = scorer(inst, text);
      if (reward && *reward == 1.0) {
        out.examples.push_back({inst, text, *reward});
        accepted = true;
      }
    }
    if (!accepted) ++out.dropped;
  }
  return out;
}

RftDataset rejection_sample(const PolicyParams& policy, const Vocabulary& vocab,
                            std::span<const PromptInstance> instances, const RftConfig& config,
                            judge::Judge& judge) {
  return rejection_sample(policy, vocab, instances, config,
                          [&judge](const PromptInstance& inst, const std::string& text) {
                            return verifiers::primary_reward(inst, text, judge);
                          });
}

void write_rft_dataset(std::ostream& out, const RftDataset& data) {
  for (const auto& ex : data.examples) {
    auto j = instance_to_json(ex.instance);
    j["completion"] = ex.completion;
    j["accepted_reward"] = ex.accepted_reward;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing RFT dataset");
}

RftDataset read_rft_dataset(std::istream& in) {
  RftDataset data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RftExample ex;
      ex.completion = j.at("completion").get<std::string>();
      ex.accepted_reward = j.at("accepted_reward").get<double>();
      j.erase("completion");
      j.erase("accepted_reward");
      ex.instance = instance_from_json(j);
      data.examples.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("RFT dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return data;
}

SftExample sft_example(const Vocabulary& vocab, const RftExample& ex) {
  SftExample s{taskgen::encode_prompt(vocab, ex.instance), vocab.encode(ex.completion)};
  s.completion.push_back(vocab.eos());
  return s;
}

double sft_loss_and_grad(const PolicyParams& params, std::span<const SftExample> batch, std::vector<double>* grad) {
  if (batch.empty()) throw InputError("SFT batch is empty");
  size_t tokens = 0;
  for (const auto& ex : batch) {
    if (ex.completion.empty()) throw InputError("SFT completion is empty");
    tokens += ex.completion.size();
  }
  const double inv = 1.0 / static_cast<double>(tokens);
  if (grad) grad->assign(params.size(), 0.0);
  double loss = 0.0;
  for (const auto& ex : batch) {
    const auto lp = sequence_logprob(params, ex.prompt, ex.completion);
    for (double l : lp) loss -= inv * l;
    if (grad) {
      const std::vector<double> coeffs(ex.completion.size(), -inv);
      accumulate_weighted_logprob_grad(params, ex.prompt, ex.completion, coeffs, *grad);
    }
  }
  if (!std::isfinite(loss)) throw NumericError("non-finite SFT loss");
  return loss;
}

double sft_step(PolicyParams& params, std::span<const SftExample> batch, double lr, OptimizerState& state,
                const AdamWConfig& adamw) {
  std::vector<double> grad;
  const double loss = sft_loss_and_grad(params, batch, &grad);
  adamw_step(params.values(), grad, state, lr, adamw);
  return loss;
}

PolicyParams format_warm_start(const PolicyParams& init, const Vocabulary& vocab,
                               std::span<const PromptInstance> prompts, const FormatWarmStart& config) {
  if (config.steps < 0 || config.batch < 1) throw InputError("warm start steps must be >= 0 and batch >= 1");
  if (config.alphabet.empty() || config.answer_len_min < 0 || config.answer_len_min > config.answer_len_max) {
    throw InputError("warm start answer settings are invalid");
  }
  PolicyParams params = init;
  if (config.steps == 0) return params;
  if (prompts.empty()) throw InputError("warm start needs prompts");
  std::vector<std::vector<TokenId>> encoded;
  for (const auto& inst : prompts) encoded.push_back(taskgen::encode_prompt(vocab, inst));
  Rng rng(mix_seed(config.seed, 0x7761726dULL));
  OptimizerState state(params.size());
  const std::string head = std::string(kThinkOpen) + std::string(kThinkClose) + std::string(kAnswerOpen);
  for (int s = 0; s < config.steps; ++s) {
    std::vector<SftExample> batch;
    for (int b = 0; b < config.batch; ++b) {
      const auto& prompt = encoded[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(encoded.size()) - 1))];
      std::string answer;
      const auto len = rng.uniform_int(config.answer_len_min, config.answer_len_max);
      for (int64_t k = 0; k < len; ++k) {
        answer += config.alphabet[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(config.alphabet.size()) - 1))];
      }
      SftExample ex{prompt, vocab.encode(head + answer + std::string(kAnswerClose))};
      ex.completion.push_back(vocab.eos());
      batch.push_back(std::move(ex));
    }
    sft_step(params, batch, config.learning_rate, state);
  }
  return params;
}

PolicyParams ties_merge(const PolicyParams& base, std::span<const PolicyParams> models, double density,
                        double lambda) {
  if (models.empty()) throw InputError("ties_merge needs at least one model");
  if (!(density > 0.0 && density <= 1.0)) throw InputError("density must lie in (0, 1]");
  if (!std::isfinite(lambda)) throw InputError("lambda must be finite");
  for (const auto& m : models) {
    if (!(m.config() == base.config()) || m.size() != base.size()) throw InputError("ties_merge: shape mismatch");
  }

  // Identical inputs merge to themselves; trimming would otherwise discard
  // most of a lone task vector.
  const bool identical = std::all_of(models.begin(), models.end(), [&](const PolicyParams& m) { return m == models[0]; });
  if (identical) {
    if (lambda == 1.0) return models[0];
    PolicyParams out = base;
    for (size_t i = 0; i < out.size(); ++i) out[i] = base[i] + lambda * (models[0][i] - base[i]);
    return out;
  }

  const size_t n = base.size();
  const size_t keep = std::min(n, static_cast<size_t>(std::ceil(density * static_cast<double>(n))));
  std::vector<std::vector<double>> deltas;
  for (const auto& m : models) {
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = m[i] - base[i];
    if (keep < n) {
      std::vector<size_t> idx(n);
      std::iota(idx.begin(), idx.end(), size_t{0});
      std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), [&](size_t a, size_t b) {
        const double ma = std::abs(d[a]), mb = std::abs(d[b]);
        return ma != mb ? ma > mb : a < b;
      });
      for (size_t k = keep; k < n; ++k) d[idx[k]] = 0.0;
    }
    deltas.push_back(std::move(d));
  }

  PolicyParams out = base;
  std::vector<double> column(deltas.size());
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < deltas.size(); ++k) column[k] = deltas[k][i];
    // Sorting makes the sums independent of input order.
    std::sort(column.begin(), column.end());
    const double total = std::accumulate(column.begin(), column.end(), 0.0);
    if (total == 0.0) continue;
    double sum = 0.0;
    int count = 0;
    for (double v : column) {
      if ((total > 0.0 && v > 0.0) || (total < 0.0 && v < 0.0)) {
        sum += v;
        ++count;
      }
    }
    if (count > 0) out[i] = base[i] + lambda * (sum / count);
  }
  return out;
}

}  // namespace omnirl
