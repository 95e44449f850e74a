#include "omnirl/minivm.h"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "omnirl/errors.h"

namespace omnirl::vm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct OpName {
  std::string_view name;
  OpCode op;
};

constexpr OpName kOps[] = {
    {"PUSH", OpCode::kPush}, {"POP", OpCode::kPop},       {"DUP", OpCode::kDup},
    {"SWAP", OpCode::kSwap}, {"ADD", OpCode::kAdd},       {"SUB", OpCode::kSub},
    {"MUL", OpCode::kMul},   {"CONCAT", OpCode::kConcat}, {"REV", OpCode::kRev},
    {"OUT", OpCode::kOut},
};

std::string_view op_name(OpCode op) {
  for (const auto& o : kOps) {
    if (o.op == op) return o.name;
  }
  return "?";
}

std::optional<Instruction> parse_instruction(std::string_view seg) {
  size_t split = 0;
  while (split < seg.size() && !std::isspace(static_cast<unsigned char>(seg[split]))) ++split;
  const std::string_view head = seg.substr(0, split);
  const std::string_view rest = trim(seg.substr(split));
  for (const auto& o : kOps) {
    if (o.name != head) continue;
    if (o.op != OpCode::kPush) {
      if (!rest.empty()) return std::nullopt;
      return Instruction{o.op, 0};
    }
    if (rest.empty()) return std::nullopt;
    int64_t value = 0;
    const char* first = rest.data();
    const char* last = rest.data() + rest.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return Instruction{OpCode::kPush, value};
  }
  return std::nullopt;
}

bool checked_concat(int64_t a, int64_t b, int64_t& out) {
  if (b < 0) return false;
  int64_t scale = 1;
  int64_t t = b;
  do {
    if (__builtin_mul_overflow(scale, int64_t{10}, &scale)) return false;
    t /= 10;
  } while (t != 0);
  int64_t shifted;
  if (__builtin_mul_overflow(a, scale, &shifted)) return false;
  return !__builtin_add_overflow(shifted, a < 0 ? -b : b, &out);
}

bool checked_rev(int64_t a, int64_t& out) {
  if (a == INT64_MIN) return false;
  const bool neg = a < 0;
  int64_t x = neg ? -a : a;
  int64_t r = 0;
  while (x != 0) {
    if (__builtin_mul_overflow(r, int64_t{10}, &r) || __builtin_add_overflow(r, x % 10, &r)) return false;
    x /= 10;
  }
  out = neg ? -r : r;
  return true;
}

}  // namespace

std::optional<MiniProgram> MiniProgram::parse(std::string_view text) {
  MiniProgram p;
  text = trim(text);
  if (text.empty()) return p;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view seg = trim(text.substr(start, end - start));
    const bool last = end == text.size();
    if (seg.empty()) {
      // A single trailing ';' is tolerated.
      if (!last || start == 0) return std::nullopt;
    } else {
      auto ins = parse_instruction(seg);
      if (!ins) return std::nullopt;
      p.ops.push_back(*ins);
      if (p.ops.size() > kMaxProgramLength) return std::nullopt;
    }
    if (last) break;
    start = end + 1;
  }
  return p;
}

std::string MiniProgram::to_string() const {
  std::string out;
  for (size_t i = 0; i < ops.size(); ++i) {
    if (i) out += ';';
    out += op_name(ops[i].op);
    if (ops[i].op == OpCode::kPush) out += ' ' + std::to_string(ops[i].arg);
  }
  return out;
}

const char* fault_name(Fault f) {
  switch (f) {
    case Fault::kNone: return "none";
    case Fault::kStackUnderflow: return "stack_underflow";
    case Fault::kStackOverflow: return "stack_overflow";
    case Fault::kArithmeticOverflow: return "arithmetic_overflow";
    case Fault::kBadOperand: return "bad_operand";
    case Fault::kStepLimit: return "step_limit";
    case Fault::kOutputLimit: return "output_limit";
    case Fault::kNoResult: return "no_result";
  }
  return "unknown";
}

ExecResult execute(const MiniProgram& program, std::span<const int64_t> input) {
  ExecResult r;
  const int limit = std::clamp(program.step_limit, 0, kMaxStepLimit);
  std::vector<int64_t> stack(input.begin(), input.end());
  if (stack.size() > kMaxStackDepth) {
    r.fault = Fault::kStackOverflow;
    return r;
  }
  bool wrote_output = false;
  auto fail = [&](Fault f) {
    r.fault = f;
    r.output.clear();
    return r;
  };
  auto pop = [&]() {
    const int64_t v = stack.back();
    stack.pop_back();
    return v;
  };

  for (const Instruction& ins : program.ops) {
    if (r.steps >= limit) return fail(Fault::kStepLimit);
    ++r.steps;
    switch (ins.op) {
      case OpCode::kPush:
        if (stack.size() >= kMaxStackDepth) return fail(Fault::kStackOverflow);
        stack.push_back(ins.arg);
        break;
      case OpCode::kPop:
        if (stack.empty()) return fail(Fault::kStackUnderflow);
        stack.pop_back();
        break;
      case OpCode::kDup:
        if (stack.empty()) return fail(Fault::kStackUnderflow);
        if (stack.size() >= kMaxStackDepth) return fail(Fault::kStackOverflow);
        stack.push_back(stack.back());
        break;
      case OpCode::kSwap:
        if (stack.size() < 2) return fail(Fault::kStackUnderflow);
        std::swap(stack[stack.size() - 1], stack[stack.size() - 2]);
        break;
      case OpCode::kAdd:
      case OpCode::kSub:
      case OpCode::kMul:
      case OpCode::kConcat: {
        if (stack.size() < 2) return fail(Fault::kStackUnderflow);
        const int64_t b = pop();
        const int64_t a = pop();
        int64_t out = 0;
        bool overflow = false;
        if (ins.op == OpCode::kAdd) {
          overflow = __builtin_add_overflow(a, b, &out);
        } else if (ins.op == OpCode::kSub) {
          overflow = __builtin_sub_overflow(a, b, &out);
        } else if (ins.op == OpCode::kMul) {
          overflow = __builtin_mul_overflow(a, b, &out);
        } else {
          if (b < 0) return fail(Fault::kBadOperand);
          overflow = !checked_concat(a, b, out);
        }
        if (overflow) return fail(Fault::kArithmeticOverflow);
        stack.push_back(out);
        break;
      }
      case OpCode::kRev: {
        if (stack.empty()) return fail(Fault::kStackUnderflow);
        int64_t out = 0;
        if (!checked_rev(stack.back(), out)) return fail(Fault::kArithmeticOverflow);
        stack.back() = out;
        break;
      }
      case OpCode::kOut:
        if (stack.empty()) return fail(Fault::kStackUnderflow);
        if (r.output.size() >= kMaxOutput) return fail(Fault::kOutputLimit);
        r.output.push_back(pop());
        wrote_output = true;
        break;
    }
  }
  if (!wrote_output) {
    if (stack.empty()) return fail(Fault::kNoResult);
    r.output.push_back(stack.back());
  }
  return r;
}

bool passes_all(const MiniProgram& program, std::span<const TestCase> cases) {
  for (const TestCase& tc : cases) {
    const ExecResult r = execute(program, tc.input);
    if (!r.ok() || r.output != tc.expected) return false;
  }
  return true;
}

nlohmann::json test_cases_to_json(std::span<const TestCase> cases) {
  auto list = [](const std::vector<int64_t>& v) -> nlohmann::json {
    if (v.size() == 1) return v[0];
    return v;
  };
  nlohmann::json out = nlohmann::json::array();
  for (const TestCase& tc : cases) {
    out.push_back({{"input", list(tc.input)}, {"expected", list(tc.expected)}});
  }
  return out;
}

std::vector<TestCase> test_cases_from_json(const nlohmann::json& j) {
  auto list = [](const nlohmann::json& v) {
    if (v.is_number_integer()) return std::vector<int64_t>{v.get<int64_t>()};
    if (v.is_array()) return v.get<std::vector<int64_t>>();
    throw FormatError("test case values must be integers or integer arrays");
  };
  if (!j.is_array()) throw FormatError("test cases must be a JSON array");
  std::vector<TestCase> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("input") || !item.contains("expected") || item.size() != 2) {
      throw FormatError("test case must be an object with exactly 'input' and 'expected'");
    }
    out.push_back({list(item.at("input")), list(item.at("expected"))});
  }
  return out;
}

}  // namespace omnirl::vm
