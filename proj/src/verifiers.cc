#include "omnirl/verifiers.h"

#include <array>
#include <cctype>
#include <iostream>

#include "omnirl/errors.h"
#include "omnirl/expr.h"
#include "omnirl/vocabulary.h"

namespace omnirl::verifiers {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

constexpr std::array<std::string_view, 4> kTags = {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose};

struct TagHit {
  size_t pos;
  int tag;  // index into kTags
};

// All tag occurrences in order of position.
std::vector<TagHit> scan_tags(std::string_view s) {
  std::vector<TagHit> hits;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '<') continue;
    for (int t = 0; t < 4; ++t) {
      if (s.substr(i, kTags[static_cast<size_t>(t)].size()) == kTags[static_cast<size_t>(t)]) {
        hits.push_back({i, t});
        i += kTags[static_cast<size_t>(t)].size() - 1;
        break;
      }
    }
  }
  return hits;
}

}  // namespace

std::optional<std::string> extract_tagged_answer(std::string_view output) {
  const auto hits = scan_tags(output);
  for (size_t i = 0; i + 1 < hits.size(); ++i) {
    if (hits[i].tag != 2) continue;
    // The next answer-related tag must close this span.
    for (size_t j = i + 1; j < hits.size(); ++j) {
      if (hits[j].tag == 2) break;
      if (hits[j].tag == 3) {
        const size_t begin = hits[i].pos + kAnswerOpen.size();
        return std::string(output.substr(begin, hits[j].pos - begin));
      }
    }
  }
  return std::nullopt;
}

std::optional<double> r_math(std::string_view output, std::string_view reference) {
  const auto ref = evaluate_expression(reference);
  if (!ref) throw InputError("math reference does not parse: " + std::string(reference));
  const auto ans = extract_tagged_answer(output);
  if (!ans) return std::nullopt;
  const auto val = evaluate_expression(*ans);
  if (!val) return std::nullopt;
  return *val == *ref ? 1.0 : 0.0;
}

std::optional<double> r_code(std::string_view output, std::span<const vm::TestCase> tests) {
  if (tests.empty()) throw InputError("r_code needs at least one test case");
  const auto ans = extract_tagged_answer(output);
  if (!ans) return std::nullopt;
  const auto program = vm::MiniProgram::parse(*ans);
  if (!program) return std::nullopt;
  return vm::passes_all(*program, tests) ? 1.0 : 0.0;
}

std::optional<double> r_qa(std::string_view output, std::string_view reference) {
  const auto ans = extract_tagged_answer(output);
  if (!ans) return std::nullopt;
  return trim(*ans) == trim(reference) ? 1.0 : 0.0;
}

std::string writing_candidate_text(std::string_view output) {
  if (auto ans = extract_tagged_answer(output)) return *ans;
  std::string out;
  size_t prev = 0;
  for (const TagHit& h : scan_tags(output)) {
    out += output.substr(prev, h.pos - prev);
    out += ' ';
    prev = h.pos + kTags[static_cast<size_t>(h.tag)].size();
  }
  out += output.substr(prev);
  return out;
}

double writing_reward_from_verdict(judge::Outcome outcome) {
  switch (outcome) {
    case judge::Outcome::kCandidatePreferred: return 1.0;
    case judge::Outcome::kTie: return 0.5;
    case judge::Outcome::kReferencePreferred: return 0.0;
  }
  return 0.0;
}

std::optional<double> r_writing(std::string_view output, std::string_view reference,
                                judge::Judge& judge, std::string_view prompt,
                                std::string_view rubric_id) {
  judge::JudgeRequest req{std::string(prompt), writing_candidate_text(output), std::string(reference),
                          std::string(rubric_id)};
  try {
    return writing_reward_from_verdict(judge.compare(req).outcome);
  } catch (const JudgeError& e) {
    std::cerr << "r_writing: judge unavailable, component undefined: " << e.what() << "\n";
    return std::nullopt;
  }
}

double r_format(std::string_view output) {
  const auto hits = scan_tags(output);
  if (hits.size() != 4) return 0.0;
  for (int t = 0; t < 4; ++t) {
    if (hits[static_cast<size_t>(t)].tag != t) return 0.0;
  }
  const size_t gap_begin = hits[1].pos + kThinkClose.size();
  if (!trim(output.substr(gap_begin, hits[2].pos - gap_begin)).empty()) return 0.0;
  return 1.0;
}

double r_tags(std::string_view output) {
  std::array<bool, 4> present{};
  for (const TagHit& h : scan_tags(output)) present[static_cast<size_t>(h.tag)] = true;
  int n = 0;
  for (bool p : present) n += p ? 1 : 0;
  return 0.25 * n;
}

std::optional<double> RewardBreakdown::primary() const {
  for (const auto& c : components) {
    if (c.name == "primary") return c.value;
  }
  return std::nullopt;
}

RewardBreakdown total_reward(std::vector<RewardComponent> components) {
  RewardBreakdown out;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw InputError("reward weight for '" + c.name + "' outside [0, 1]");
    }
    if (c.value) {
      out.total += c.weight * *c.value;
      out.valid = true;
    }
  }
  out.components = std::move(components);
  return out;
}

std::optional<double> primary_reward(const PromptInstance& inst, std::string_view output,
                                     judge::Judge& judge) {
  switch (inst.task) {
    case TaskId::kMath: return r_math(output, std::get<MathPhi>(inst.phi).answer);
    case TaskId::kCode: return r_code(output, std::get<CodePhi>(inst.phi).tests);
    case TaskId::kQa: return r_qa(output, std::get<QaPhi>(inst.phi).answer);
    case TaskId::kWriting: {
      const auto& w = std::get<WritingPhi>(inst.phi);
      return r_writing(output, w.reference, judge, inst.prompt, w.rubric);
    }
  }
  return std::nullopt;
}

namespace {

RewardBreakdown compose(std::optional<double> primary, std::string_view output,
                        const RewardWeights& weights) {
  std::vector<RewardComponent> comps;
  if (weights.primary) comps.push_back({"primary", primary, *weights.primary});
  if (weights.format) comps.push_back({"format", r_format(output), *weights.format});
  if (weights.tags) comps.push_back({"tags", r_tags(output), *weights.tags});
  return total_reward(std::move(comps));
}

}  // namespace

RewardBreakdown score_output(const PromptInstance& inst, std::string_view output,
                             const RewardWeights& weights, judge::Judge& judge) {
  std::optional<double> primary;
  if (weights.primary) primary = primary_reward(inst, output, judge);
  return compose(primary, output, weights);
}

std::vector<RewardBreakdown> score_outputs(const PromptInstance& inst,
                                           std::span<const std::string> outputs,
                                           const RewardWeights& weights, judge::Judge& judge) {
  std::vector<RewardBreakdown> out;
  out.reserve(outputs.size());
  if (inst.task != TaskId::kWriting || !weights.primary) {
    for (const auto& o : outputs) out.push_back(score_output(inst, o, weights, judge));
    return out;
  }
  const auto& w = std::get<WritingPhi>(inst.phi);
  std::vector<judge::JudgeRequest> reqs;
  reqs.reserve(outputs.size());
  for (const auto& o : outputs) reqs.push_back({inst.prompt, writing_candidate_text(o), w.reference, w.rubric});
  const auto verdicts = judge.compare_batch(reqs);
  for (size_t i = 0; i < outputs.size(); ++i) {
    std::optional<double> primary;
    if (verdicts[i]) primary = writing_reward_from_verdict(verdicts[i]->outcome);
    out.push_back(compose(primary, outputs[i], weights));
  }
  return out;
}

}  // namespace omnirl::verifiers
