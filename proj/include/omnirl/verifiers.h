#ifndef OMNIRL_VERIFIERS_H_
#define OMNIRL_VERIFIERS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnirl/judge.h"
#include "omnirl/minivm.h"
#include "omnirl/task.h"

namespace omnirl::verifiers {

// Content of the first <answer>...</answer> span that contains no other
// answer tag; nullopt when there is none.
std::optional<std::string> extract_tagged_answer(std::string_view output);

// 1 iff the extracted answer equals the reference as an exact rational.
// nullopt when extraction fails or the answer does not parse.
std::optional<double> r_math(std::string_view output, std::string_view reference);

// Parses the extracted answer as a MiniProgram; 1 iff every case passes.
// VM faults score 0; an unparsable program is nullopt.
std::optional<double> r_code(std::string_view output, std::span<const vm::TestCase> tests);

// Exact, case-sensitive match after trimming surrounding whitespace.
std::optional<double> r_qa(std::string_view output, std::string_view reference);

// Text the judge sees for a writing output: the extracted answer when present,
// otherwise the output with tag markers removed.
std::string writing_candidate_text(std::string_view output);

// 1.0 / 0.5 / 0.0 for candidate preferred / tie / reference preferred.
double writing_reward_from_verdict(judge::Outcome outcome);

// nullopt (logged) when the judge fails.
std::optional<double> r_writing(std::string_view output, std::string_view reference,
                                judge::Judge& judge, std::string_view prompt = {},
                                std::string_view rubric_id = "nature");

// 1 iff the output has exactly one <think>...</think> followed (after optional
// whitespace) by exactly one <answer>...</answer>. Free text before and after
// the tagged block is allowed.
double r_format(std::string_view output);

// One quarter per distinct marker present among the four tags.
double r_tags(std::string_view output);

struct RewardComponent {
  std::string name;
  std::optional<double> value;  // nullopt = undefined
  double weight = 1.0;
};

struct RewardBreakdown {
  std::vector<RewardComponent> components;
  double total = 0.0;
  bool valid = false;

  // Value of the component named "primary", if defined.
  std::optional<double> primary() const;
};

// total = sum of weight * value over defined components; valid iff at least
// one component is defined. Throws InputError for weights outside [0, 1].
RewardBreakdown total_reward(std::vector<RewardComponent> components);

// Which components a task scores, and their weights. An absent weight drops
// the component from the task's reward set.
struct RewardWeights {
  std::optional<double> primary = 1.0;
  std::optional<double> format = 0.1;
  std::optional<double> tags = 0.05;
};

// Task-specific primary reward.
std::optional<double> primary_reward(const PromptInstance& inst, std::string_view output,
                                     judge::Judge& judge);

RewardBreakdown score_output(const PromptInstance& inst, std::string_view output,
                             const RewardWeights& weights, judge::Judge& judge);

// Scores several outputs for one instance; writing comparisons go to the
// judge as one batch.
std::vector<RewardBreakdown> score_outputs(const PromptInstance& inst,
                                           std::span<const std::string> outputs,
                                           const RewardWeights& weights, judge::Judge& judge);

}  // namespace omnirl::verifiers

#endif  // OMNIRL_VERIFIERS_H_
