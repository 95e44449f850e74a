#ifndef OMNIRL_MINIVM_H_
#define OMNIRL_MINIVM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace omnirl::vm {

enum class OpCode { kPush, kPop, kDup, kSwap, kAdd, kSub, kMul, kConcat, kRev, kOut };

struct Instruction {
  OpCode op;
  int64_t arg = 0;  // PUSH only

  bool operator==(const Instruction&) const = default;
};

inline constexpr size_t kMaxProgramLength = 64;
inline constexpr int kMaxStepLimit = 4096;
inline constexpr size_t kMaxStackDepth = 256;
inline constexpr size_t kMaxOutput = 256;

// Straight-line stack program. Text form: semicolon-separated uppercase ops,
// e.g. "PUSH 2;ADD;OUT". The empty string is the empty (identity) program.
struct MiniProgram {
  std::vector<Instruction> ops;
  int step_limit = kMaxStepLimit;

  // Parses text; nullopt on unknown ops, bad literals, or more than 64 ops.
  static std::optional<MiniProgram> parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const MiniProgram&) const = default;
};

enum class Fault { kNone, kStackUnderflow, kStackOverflow, kArithmeticOverflow, kBadOperand,
                   kStepLimit, kOutputLimit, kNoResult };

struct ExecResult {
  Fault fault = Fault::kNone;
  std::vector<int64_t> output;
  int steps = 0;

  bool ok() const { return fault == Fault::kNone; }
};

const char* fault_name(Fault f);

// Pushes `input` in order, runs the program, and returns the OUT buffer; if
// the program never executes OUT the result is the final top of stack.
ExecResult execute(const MiniProgram& program, std::span<const int64_t> input);

struct TestCase {
  std::vector<int64_t> input;
  std::vector<int64_t> expected;

  bool operator==(const TestCase&) const = default;
};

// True iff every case runs without fault and produces exactly `expected`.
bool passes_all(const MiniProgram& program, std::span<const TestCase> cases);

// JSON form: [{"input": 3 | [3, 4], "expected": 5 | [5, 6]}, ...]. Scalars
// are written for single-element lists.
nlohmann::json test_cases_to_json(std::span<const TestCase> cases);
std::vector<TestCase> test_cases_from_json(const nlohmann::json& j);

}  // namespace omnirl::vm

#endif  // OMNIRL_MINIVM_H_
