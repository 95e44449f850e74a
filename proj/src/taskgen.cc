#include "omnirl/taskgen.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "omnirl/errors.h"
#include "omnirl/expr.h"
#include "omnirl/judge.h"
#include "omnirl/minivm.h"
#include "omnirl/rng.h"

namespace omnirl::taskgen {
namespace {

constexpr int kMaxAttempts = 10000;

Rng instance_rng(const TaskSpec& spec, Split split, int index) {
  const uint64_t stream = split == Split::kTrain ? 0x7261696eULL : 0x6576616cULL;
  return Rng(mix_seed(mix_seed(spec.seed, stream), static_cast<uint64_t>(index)));
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(v.size()) - 1))];
}

char random_letter(Rng& rng) { return static_cast<char>('a' + rng.uniform_int(0, 25)); }

std::string random_number(int len, Rng& rng) {
  std::string s;
  for (int i = 0; i < len; ++i) {
    s += static_cast<char>('0' + (i == 0 && len > 1 ? rng.uniform_int(1, 9) : rng.uniform_int(0, 9)));
  }
  return s;
}

bool is_numeric(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// One lexical or numeric perturbation of the reference.
std::string perturb(const std::string& ref, const QaParams& p, Rng& rng) {
  std::string out = ref;
  const bool numeric = is_numeric(ref);
  const int len = static_cast<int>(ref.size());
  const int mode = static_cast<int>(rng.uniform_int(0, 2));
  if (mode == 1 && len < p.answer_len_max) {
    // Insert a character.
    const auto pos = static_cast<size_t>(rng.uniform_int(numeric ? 1 : 0, len));
    out.insert(pos, 1, numeric ? static_cast<char>('0' + rng.uniform_int(0, 9)) : random_letter(rng));
  } else if (mode == 2 && len > p.answer_len_min && len > 1) {
    // Drop a character.
    out.erase(static_cast<size_t>(rng.uniform_int(numeric ? 1 : 0, len - 1)), 1);
  } else {
    const auto pos = static_cast<size_t>(rng.uniform_int(0, len - 1));
    if (numeric) {
      const int lo = (pos == 0 && len > 1) ? 1 : 0;
      out[pos] = static_cast<char>('0' + rng.uniform_int(lo, 9));
    } else {
      out[pos] = random_letter(rng);
    }
  }
  return out;
}

std::string serialize_values(const std::vector<int64_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

vm::OpCode opcode_of(const std::string& name) {
  static const std::pair<const char*, vm::OpCode> kNames[] = {
      {"PUSH", vm::OpCode::kPush}, {"POP", vm::OpCode::kPop},       {"DUP", vm::OpCode::kDup},
      {"SWAP", vm::OpCode::kSwap}, {"ADD", vm::OpCode::kAdd},       {"SUB", vm::OpCode::kSub},
      {"MUL", vm::OpCode::kMul},   {"CONCAT", vm::OpCode::kConcat}, {"REV", vm::OpCode::kRev},
      {"OUT", vm::OpCode::kOut},
  };
  for (const auto& [n, op] : kNames) {
    if (name == n) return op;
  }
  throw InputError("unknown MiniProgram op: " + name);
}

std::vector<std::string> rubric_ids(const WritingParams& p) {
  if (!p.rubrics.empty()) return p.rubrics;
  std::vector<std::string> ids;
  for (const auto& r : judge::builtin_rubrics()) ids.push_back(r.id);
  return ids;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kFillers = {"the", "a",   "warm", "old", "red", "big", "soft",
                                                    "blue", "day", "and", "my", "we", "see", "so"};
  return kFillers;
}

}  // namespace

void validate_spec(const TaskSpec& spec) {
  if (spec.train_size < 1 || spec.eval_size < 1) throw InputError("split sizes must be >= 1");
  const auto& m = spec.math;
  if (m.operand_min > m.operand_max) throw InputError("math operand range is empty");
  if (m.operands_min < 1 || m.operands_min > m.operands_max || m.operands_max > 6) {
    throw InputError("math operand count must be within [1, 6]");
  }
  if (m.ops.empty() || m.ops.find_first_not_of("+-*/") != std::string::npos) {
    throw InputError("math ops must be a nonempty subset of +-*/");
  }
  const auto& c = spec.code;
  if (c.program_len_min < 0 || c.program_len_min > c.program_len_max || c.program_len_max > 8) {
    throw InputError("code program length must be within [0, 8]");
  }
  if (c.tests_min < 1 || c.tests_min > c.tests_max) throw InputError("code test count range is invalid");
  if (c.inputs < 1 || c.inputs > 4 || c.input_min > c.input_max || c.push_min > c.push_max) {
    throw InputError("code input parameters are invalid");
  }
  for (const auto& op : c.ops) opcode_of(op);
  const auto& q = spec.qa;
  if (q.distractors < 1 || q.distractors > 25) throw InputError("qa distractor count must be in [1, 25]");
  if (q.entities < 1 || q.entities > 26) throw InputError("qa entities must be in [1, 26]");
  if (q.answer_len_min < 1 || q.answer_len_min > q.answer_len_max || q.answer_len_max > 8) {
    throw InputError("qa answer length range is invalid");
  }
  for (const auto& id : spec.writing.rubrics) judge::find_rubric(id);
  if (spec.writing.reference_words_min < 1 ||
      spec.writing.reference_words_min > spec.writing.reference_words_max) {
    throw InputError("writing reference length range is invalid");
  }
}

std::vector<PromptInstance> generate_math(const TaskSpec& spec, int n, Split split) {
  if (n < 1) throw InputError("n must be >= 1");
  const auto& p = spec.math;
  std::vector<PromptInstance> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = instance_rng(spec, split, i);
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxAttempts) throw InputError("cannot generate a well-defined math instance");
      std::vector<int> operands = p.fixed_operands;
      if (operands.empty()) {
        const auto k = rng.uniform_int(p.operands_min, p.operands_max);
        for (int64_t j = 0; j < k; ++j) operands.push_back(static_cast<int>(rng.uniform_int(p.operand_min, p.operand_max)));
      }
      std::string expr;
      for (size_t j = 0; j < operands.size(); ++j) {
        if (j) expr += p.ops[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(p.ops.size()) - 1))];
        expr += std::to_string(operands[j]);
      }
      const auto value = evaluate_expression(expr);
      if (!value) continue;  // division by zero
      PromptInstance inst;
      inst.task = TaskId::kMath;
      inst.prompt = expr;
      inst.phi = MathPhi{value->to_string()};
      inst.split = split;
      out.push_back(std::move(inst));
      break;
    }
  }
  return out;
}

std::vector<PromptInstance> generate_code(const TaskSpec& spec, int n, Split split) {
  if (n < 1) throw InputError("n must be >= 1");
  const auto& p = spec.code;
  std::vector<PromptInstance> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = instance_rng(spec, split, i);
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxAttempts) throw InputError("cannot generate a fault-free code instance");
      vm::MiniProgram prog;
      const auto len = rng.uniform_int(p.program_len_min, p.program_len_max);
      for (int64_t j = 0; j < len; ++j) {
        vm::Instruction ins{opcode_of(pick(p.ops, rng)), 0};
        if (ins.op == vm::OpCode::kPush) ins.arg = rng.uniform_int(p.push_min, p.push_max);
        prog.ops.push_back(ins);
      }
      const auto ntests = rng.uniform_int(p.tests_min, p.tests_max);
      std::vector<vm::TestCase> tests;
      bool ok = true;
      for (int64_t t = 0; t < ntests && ok; ++t) {
        vm::TestCase tc;
        for (int j = 0; j < p.inputs; ++j) tc.input.push_back(rng.uniform_int(p.input_min, p.input_max));
        const auto r = vm::execute(prog, tc.input);
        if (!r.ok() || r.output.empty()) ok = false;
        tc.expected = r.output;
        tests.push_back(std::move(tc));
      }
      if (!ok) continue;
      std::string prompt;
      for (size_t t = 0; t < tests.size(); ++t) {
        if (t) prompt += ' ';
        prompt += serialize_values(tests[t].input) + "=" + serialize_values(tests[t].expected);
      }
      PromptInstance inst;
      inst.task = TaskId::kCode;
      inst.prompt = prompt;
      inst.phi = CodePhi{std::move(tests), prog.to_string()};
      inst.split = split;
      out.push_back(std::move(inst));
      break;
    }
  }
  return out;
}

std::vector<std::string> qa_world(const QaParams& p) {
  Rng rng(mix_seed(p.world_seed, 0x776f726cULL));
  std::vector<std::string> values;
  std::set<std::string> used;
  for (int e = 0; e < p.entities; ++e) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxAttempts) throw InputError("qa world too small for the entity count");
      const int len = static_cast<int>(rng.uniform_int(p.answer_len_min, p.answer_len_max));
      std::string v;
      if (rng.bernoulli(p.numeric_fraction)) {
        v = random_number(len, rng);
      } else {
        for (int j = 0; j < len; ++j) v += random_letter(rng);
      }
      // Distinct values while the value space allows it.
      if (used.insert(v).second || attempt > 100) {
        values.push_back(v);
        break;
      }
    }
  }
  return values;
}

std::vector<PromptInstance> generate_qa(const TaskSpec& spec, int n, Split split) {
  if (n < 1) throw InputError("n must be >= 1");
  const auto& p = spec.qa;
  if (p.distractors < 1) throw InputError("distractor count must be >= 1");
  const auto world = qa_world(p);
  std::vector<PromptInstance> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = instance_rng(spec, split, i);
    const auto entity = static_cast<int>(rng.uniform_int(0, p.entities - 1));
    const std::string& ref = world[static_cast<size_t>(entity)];
    std::vector<std::string> candidates{ref};
    std::set<std::string> seen{ref};
    int attempts = 0;
    while (static_cast<int>(candidates.size()) < p.distractors + 1) {
      if (++attempts > kMaxAttempts) throw InputError("cannot find enough unique distractors for '" + ref + "'");
      std::string d = perturb(ref, p, rng);
      if (d.empty() || !seen.insert(d).second) continue;
      candidates.push_back(std::move(d));
    }
    shuffle(candidates, rng);
    const auto correct = static_cast<size_t>(std::find(candidates.begin(), candidates.end(), ref) - candidates.begin());

    PromptInstance inst;
    inst.task = TaskId::kQa;
    inst.answer_format = p.answer_format;
    inst.split = split;
    std::string prompt;
    if (p.answer_format == AnswerFormat::kFullText) {
      for (size_t c = 0; c < candidates.size(); ++c) {
        if (c) prompt += '/';
        prompt += candidates[c];
      }
      inst.phi = QaPhi{ref, candidates};
    } else {
      for (size_t c = 0; c < candidates.size(); ++c) {
        if (c) prompt += ' ';
        prompt += static_cast<char>('A' + c);
        prompt += ')';
        prompt += candidates[c];
      }
      inst.phi = QaPhi{std::string(1, static_cast<char>('A' + correct)), candidates};
    }
    prompt += ' ';
    prompt += static_cast<char>('A' + entity);
    prompt += '?';
    inst.prompt = std::move(prompt);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<PromptInstance> generate_writing(const TaskSpec& spec, int n, Split split) {
  if (n < 1) throw InputError("n must be >= 1");
  const auto ids = rubric_ids(spec.writing);
  std::vector<PromptInstance> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = instance_rng(spec, split, i);
    const judge::Rubric& rubric = judge::find_rubric(pick(ids, rng));
    std::vector<std::string> topic = rubric.keywords;
    shuffle(topic, rng);
    std::string prompt = "Write:";
    for (const auto& w : topic) prompt += " " + w;

    // References never use every keyword, so a keyword-complete answer of
    // the right length always wins.
    const auto nk = rng.uniform_int(0, static_cast<int64_t>(rubric.keywords.size()) - 1);
    const auto total = std::max<int64_t>(
        nk, rng.uniform_int(spec.writing.reference_words_min, spec.writing.reference_words_max));
    std::vector<std::string> words(topic.begin(), topic.begin() + nk);
    while (static_cast<int64_t>(words.size()) < total) words.push_back(pick(filler_words(), rng));
    if (words.empty()) words.push_back(pick(filler_words(), rng));
    shuffle(words, rng);
    std::string reference;
    for (size_t w = 0; w < words.size(); ++w) reference += (w ? " " : "") + words[w];

    PromptInstance inst;
    inst.task = TaskId::kWriting;
    inst.prompt = std::move(prompt);
    inst.phi = WritingPhi{std::move(reference), rubric.id};
    inst.split = split;
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<PromptInstance> generate(const TaskSpec& spec, int n, Split split) {
  switch (spec.task) {
    case TaskId::kMath: return generate_math(spec, n, split);
    case TaskId::kCode: return generate_code(spec, n, split);
    case TaskId::kQa: return generate_qa(spec, n, split);
    case TaskId::kWriting: return generate_writing(spec, n, split);
  }
  throw InputError("unknown task");
}

Splits generate_splits(const TaskSpec& spec) {
  validate_spec(spec);
  Splits s;
  s.train = generate(spec, spec.train_size, Split::kTrain);
  std::unordered_set<std::string> train_keys;
  for (const auto& inst : s.train) train_keys.insert(instance_key(inst));

  // Draw eval instances in chunks until enough non-colliding ones exist.
  int drawn = 0;
  const int budget = std::max(spec.eval_size * 50, 1000);
  while (static_cast<int>(s.eval.size()) < spec.eval_size) {
    const int want = spec.eval_size * 2;
    if (drawn + want > budget) throw InputError("cannot draw an eval split disjoint from train");
    auto batch = generate(spec, drawn + want, Split::kEval);
    for (int i = drawn; i < drawn + want && static_cast<int>(s.eval.size()) < spec.eval_size; ++i) {
      if (!train_keys.count(instance_key(batch[static_cast<size_t>(i)]))) {
        s.eval.push_back(std::move(batch[static_cast<size_t>(i)]));
      }
    }
    drawn += want;
  }
  return s;
}

std::string render_prompt(const PromptInstance& inst) {
  return std::string(kInstruction) + inst.prompt;
}

std::string reference_output(const PromptInstance& inst) {
  std::string answer;
  if (const auto* m = std::get_if<MathPhi>(&inst.phi)) {
    answer = m->answer;
  } else if (const auto* c = std::get_if<CodePhi>(&inst.phi)) {
    answer = c->reference_program;
  } else if (const auto* q = std::get_if<QaPhi>(&inst.phi)) {
    answer = q->answer;
  } else {
    const auto& rubric = judge::find_rubric(std::get<WritingPhi>(inst.phi).rubric);
    for (const auto& k : rubric.keywords) answer += (answer.empty() ? "" : " ") + k;
  }
  return std::string(kThinkOpen) + std::string(kThinkClose) + std::string(kAnswerOpen) + answer +
         std::string(kAnswerClose);
}

std::vector<TokenId> encode_prompt(const Vocabulary& vocab, const PromptInstance& inst) {
  std::vector<TokenId> ids{vocab.bos()};
  const auto body = vocab.encode(render_prompt(inst));
  ids.insert(ids.end(), body.begin(), body.end());
  return ids;
}

}  // namespace omnirl::taskgen
