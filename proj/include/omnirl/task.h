#ifndef OMNIRL_TASK_H_
#define OMNIRL_TASK_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "omnirl/minivm.h"

namespace omnirl {

// Declared in lexicographic order of their names.
enum class TaskId { kCode, kMath, kQa, kWriting };

inline constexpr std::array<TaskId, 4> kAllTasks = {TaskId::kCode, TaskId::kMath, TaskId::kQa,
                                                    TaskId::kWriting};

std::string_view task_name(TaskId t);
// Throws InputError for anything but "code", "math", "qa", "writing".
TaskId task_from_name(std::string_view name);

enum class AnswerFormat { kFullText, kLetterChoice };
enum class Split { kTrain, kEval };

std::string_view answer_format_name(AnswerFormat f);
std::string_view split_name(Split s);

// Evaluation context, one variant per task.
struct MathPhi {
  std::string answer;
  bool operator==(const MathPhi&) const = default;
};
struct CodePhi {
  std::vector<vm::TestCase> tests;
  std::string reference_program;  // hidden from the policy
  bool operator==(const CodePhi&) const = default;
};
struct QaPhi {
  std::string answer;
  std::vector<std::string> candidates;  // in prompt order
  bool operator==(const QaPhi&) const = default;
};
struct WritingPhi {
  std::string reference;
  std::string rubric;
  bool operator==(const WritingPhi&) const = default;
};
using Phi = std::variant<MathPhi, CodePhi, QaPhi, WritingPhi>;

struct PromptInstance {
  TaskId task = TaskId::kMath;
  std::string prompt;
  Phi phi;
  AnswerFormat answer_format = AnswerFormat::kFullText;
  Split split = Split::kTrain;

  bool operator==(const PromptInstance&) const = default;
};

// True when the phi alternative matches the task id.
bool phi_matches_task(const PromptInstance& inst);

inline constexpr std::string_view kDataSchema = "omnirl-data-v1";

// One JSONL record: {schema, task, prompt, phi, answer_format, split}.
nlohmann::json instance_to_json(const PromptInstance& inst);
// Throws FormatError on schema violations, including a phi that does not
// match the task.
PromptInstance instance_from_json(const nlohmann::json& j);

// Key used for train/eval disjointness checks: prompt plus serialized phi.
std::string instance_key(const PromptInstance& inst);

void write_dataset(std::ostream& out, std::span<const PromptInstance> instances);
std::vector<PromptInstance> read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, std::span<const PromptInstance> instances);
std::vector<PromptInstance> load_dataset(const std::filesystem::path& path);

}  // namespace omnirl

#endif  // OMNIRL_TASK_H_
