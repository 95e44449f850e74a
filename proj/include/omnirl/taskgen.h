#ifndef OMNIRL_TASKGEN_H_
#define OMNIRL_TASKGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "omnirl/task.h"
#include "omnirl/vocabulary.h"

namespace omnirl::taskgen {

// "Compute a op b [op c]" over small integers; references are exact rationals.
struct MathParams {
  int operand_min = 0;
  int operand_max = 9;
  int operands_min = 2;
  int operands_max = 2;
  std::string ops = "+-*";
  // When nonempty every instance uses exactly these operands, in order.
  std::vector<int> fixed_operands;
};

// Stack-program synthesis from input/output examples.
struct CodeParams {
  int program_len_min = 1;
  int program_len_max = 3;  // <= 8
  int inputs = 2;
  int input_min = 0;
  int input_max = 9;
  int tests_min = 2;
  int tests_max = 4;
  int push_min = 1;
  int push_max = 9;
  std::vector<std::string> ops = {"PUSH", "POP", "DUP", "SWAP", "ADD", "SUB", "MUL", "CONCAT", "REV"};
};

// Fact lookup over a seeded synthetic knowledge base of entities 'A', 'B', ...
// with candidate answers listed in the prompt.
struct QaParams {
  int distractors = 7;
  AnswerFormat answer_format = AnswerFormat::kFullText;
  int entities = 26;
  int answer_len_min = 1;
  int answer_len_max = 2;
  double numeric_fraction = 0.5;
  uint64_t world_seed = 7;
};

struct WritingParams {
  std::vector<std::string> rubrics;  // empty = all built-in rubrics
  int reference_words_min = 1;
  int reference_words_max = 7;
};

struct TaskSpec {
  TaskId task = TaskId::kMath;
  int train_size = 512;
  int eval_size = 128;
  uint64_t seed = 0;
  MathParams math;
  CodeParams code;
  QaParams qa;
  WritingParams writing;
};

// Throws InputError on inconsistent parameters.
void validate_spec(const TaskSpec& spec);

// The n instances of one split. Each instance draws from its own stream
// derived from (seed, split, index); train and eval use disjoint streams.
std::vector<PromptInstance> generate_math(const TaskSpec& spec, int n, Split split = Split::kTrain);
std::vector<PromptInstance> generate_code(const TaskSpec& spec, int n, Split split = Split::kTrain);
std::vector<PromptInstance> generate_qa(const TaskSpec& spec, int n, Split split = Split::kTrain);
std::vector<PromptInstance> generate_writing(const TaskSpec& spec, int n, Split split = Split::kTrain);
std::vector<PromptInstance> generate(const TaskSpec& spec, int n, Split split);

struct Splits {
  std::vector<PromptInstance> train;
  std::vector<PromptInstance> eval;
};

// Train and eval sets of the configured sizes. Eval candidates that collide
// with a train instance (same prompt and phi) are skipped.
Splits generate_splits(const TaskSpec& spec);

// Knowledge base used by generate_qa: value for entity index i.
std::vector<std::string> qa_world(const QaParams& params);

// Instruction header placed before every prompt.
inline constexpr std::string_view kInstruction =
    "Think in <think></think>, then answer in <answer></answer>.\n";

std::string render_prompt(const PromptInstance& inst);

// A tagged output that earns full primary reward: the reference answer or
// program, or for writing a keyword-complete text that beats the reference.
std::string reference_output(const PromptInstance& inst);
// BOS followed by the encoded rendered prompt.
std::vector<TokenId> encode_prompt(const Vocabulary& vocab, const PromptInstance& inst);

}  // namespace omnirl::taskgen

#endif  // OMNIRL_TASKGEN_H_
