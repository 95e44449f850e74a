#include "omnirl/taskgen.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "omnirl/errors.h"
#include "omnirl/expr.h"
#include "omnirl/judge.h"
#include "omnirl/minivm.h"
#include "omnirl/verifiers.h"
#include "rational_oracle.h"

namespace omnirl::taskgen {
namespace {

TaskSpec spec_for(TaskId t, uint64_t seed = 1) {
  TaskSpec s;
  s.task = t;
  s.seed = seed;
  return s;
}

std::string jsonl(const std::vector<PromptInstance>& v) {
  std::ostringstream os;
  write_dataset(os, v);
  return os.str();
}

// Operators alternate with single integers in generated math prompts, so the
// oracle can fold them with plain precedence rules in big rationals.
std::optional<testing::BigRational> eval_flat(const std::string& expr) {
  std::vector<testing::BigRational> terms;
  std::vector<char> ops;
  size_t i = 0;
  auto number = [&] {
    size_t j = i;
    while (j < expr.size() && std::isdigit(static_cast<unsigned char>(expr[j]))) ++j;
    testing::BigRational v(std::stoll(expr.substr(i, j - i)));
    i = j;
    return v;
  };
  terms.push_back(number());
  while (i < expr.size()) {
    const char op = expr[i++];
    testing::BigRational rhs = number();
    if (op == '*' || op == '/') {
      if (op == '/' && rhs == 0) return std::nullopt;
      if (op == '*') {
        terms.back() *= rhs;
      } else {
        terms.back() /= rhs;
      }
    } else {
      ops.push_back(op);
      terms.push_back(rhs);
    }
  }
  testing::BigRational acc = terms[0];
  for (size_t k = 0; k < ops.size(); ++k) {
    if (ops[k] == '+') {
      acc += terms[k + 1];
    } else {
      acc -= terms[k + 1];
    }
  }
  return acc;
}

TEST(Math, ForcedOperands) {
  auto s = spec_for(TaskId::kMath);
  s.math.fixed_operands = {3, 4};
  s.math.ops = "+";
  const auto v = generate_math(s, 3);
  for (const auto& inst : v) {
    EXPECT_EQ(inst.prompt, "3+4");
    EXPECT_EQ(std::get<MathPhi>(inst.phi).answer, "7");
  }
}

TEST(Math, ReferencesMatchBigRationalOracle) {
  auto s = spec_for(TaskId::kMath, 3);
  s.math.ops = "+-*/";
  s.math.operands_max = 4;
  const auto v = generate_math(s, 1000);
  for (const auto& inst : v) {
    const auto want = eval_flat(inst.prompt);
    ASSERT_TRUE(want) << inst.prompt;
    const auto got = evaluate_expression(std::get<MathPhi>(inst.phi).answer);
    ASSERT_TRUE(got);
    ASSERT_EQ(testing::to_big(*got), *want) << inst.prompt;
  }
}

TEST(Code, ReferenceProgramsPassTheirTests) {
  auto s = spec_for(TaskId::kCode, 5);
  s.code.program_len_max = 6;
  const auto v = generate_code(s, 500);
  for (const auto& inst : v) {
    const auto& phi = std::get<CodePhi>(inst.phi);
    const auto prog = vm::MiniProgram::parse(phi.reference_program);
    ASSERT_TRUE(prog) << phi.reference_program;
    for (const auto& tc : phi.tests) {
      const auto r = vm::execute(*prog, tc.input);
      ASSERT_TRUE(r.ok());
      EXPECT_EQ(r.output, tc.expected);
    }
    EXPECT_EQ(verifiers::r_code(reference_output(inst), phi.tests), 1.0);
  }
}

TEST(Code, IdentityTaskHasEmptyProgram) {
  auto s = spec_for(TaskId::kCode);
  s.code.program_len_min = 0;
  s.code.program_len_max = 0;
  s.code.inputs = 1;
  for (const auto& inst : generate_code(s, 20)) {
    const auto& phi = std::get<CodePhi>(inst.phi);
    EXPECT_EQ(phi.reference_program, "");
    for (const auto& tc : phi.tests) EXPECT_EQ(tc.input, tc.expected);
    EXPECT_TRUE(vm::passes_all(*vm::MiniProgram::parse(""), phi.tests));
  }
}

TEST(Qa, OneDistractorGivesTwoCandidates) {
  auto s = spec_for(TaskId::kQa);
  s.qa.distractors = 1;
  for (const auto& inst : generate_qa(s, 100)) {
    const auto& phi = std::get<QaPhi>(inst.phi);
    ASSERT_EQ(phi.candidates.size(), 2u);
    EXPECT_EQ(std::count(phi.candidates.begin(), phi.candidates.end(), phi.answer), 1);
  }
}

TEST(Qa, CandidatesUniqueAndReferenceAppearsOnce) {
  auto s = spec_for(TaskId::kQa, 8);
  const auto v = generate_qa(s, 500);
  for (const auto& inst : v) {
    const auto& phi = std::get<QaPhi>(inst.phi);
    ASSERT_EQ(phi.candidates.size(), 8u);
    for (size_t a = 0; a < phi.candidates.size(); ++a) {
      for (size_t b = a + 1; b < phi.candidates.size(); ++b) ASSERT_NE(phi.candidates[a], phi.candidates[b]);
    }
    int hits = 0;
    for (const auto& c : phi.candidates) hits += c == phi.answer ? 1 : 0;
    EXPECT_EQ(hits, 1);
    // The world's value for the asked entity is the reference.
    const char entity = inst.prompt[inst.prompt.size() - 2];
    EXPECT_EQ(qa_world(s.qa)[static_cast<size_t>(entity - 'A')], phi.answer);
  }
}

TEST(Qa, LetterChoiceAnswersWithTheLetter) {
  auto s = spec_for(TaskId::kQa);
  s.qa.answer_format = AnswerFormat::kLetterChoice;
  s.qa.distractors = 3;
  for (const auto& inst : generate_qa(s, 50)) {
    const auto& phi = std::get<QaPhi>(inst.phi);
    ASSERT_EQ(phi.answer.size(), 1u);
    const size_t idx = static_cast<size_t>(phi.answer[0] - 'A');
    ASSERT_LT(idx, phi.candidates.size());
    EXPECT_NE(inst.prompt.find(phi.answer + ")" + phi.candidates[idx]), std::string::npos);
    EXPECT_EQ(inst.answer_format, AnswerFormat::kLetterChoice);
  }
}

TEST(Writing, ReferencesBeatTheEmptyString) {
  auto s = spec_for(TaskId::kWriting, 4);
  for (const auto& inst : generate_writing(s, 200)) {
    const auto& phi = std::get<WritingPhi>(inst.phi);
    const auto& rubric = judge::find_rubric(phi.rubric);
    EXPECT_EQ(judge::oracle_compare(phi.reference, "", rubric).outcome, judge::Outcome::kCandidatePreferred);
    // The scripted answer always wins against the reference.
    judge::OracleJudge j;
    EXPECT_EQ(verifiers::primary_reward(inst, reference_output(inst), j), 1.0) << phi.reference;
  }
}

TEST(AllTasks, DeterministicRegeneration) {
  for (TaskId t : kAllTasks) {
    const auto s = spec_for(t, 11);
    EXPECT_EQ(jsonl(generate(s, 50, Split::kTrain)), jsonl(generate(s, 50, Split::kTrain)));
    EXPECT_NE(jsonl(generate(spec_for(t, 12), 50, Split::kTrain)), jsonl(generate(s, 50, Split::kTrain)));
  }
}

TEST(AllTasks, SplitsAreDisjointAndWellFormed) {
  const auto vocab = Vocabulary::standard();
  for (TaskId t : kAllTasks) {
    auto s = spec_for(t, 21);
    s.train_size = 256;
    s.eval_size = 64;
    const auto sp = generate_splits(s);
    ASSERT_EQ(sp.train.size(), 256u);
    ASSERT_EQ(sp.eval.size(), 64u);
    std::set<std::string> train_keys;
    for (const auto& inst : sp.train) {
      train_keys.insert(instance_key(inst));
      EXPECT_EQ(inst.split, Split::kTrain);
    }
    for (const auto& inst : sp.eval) {
      EXPECT_FALSE(train_keys.count(instance_key(inst))) << inst.prompt;
      EXPECT_EQ(inst.split, Split::kEval);
    }
    for (const auto* split : {&sp.train, &sp.eval}) {
      for (const auto& inst : *split) {
        EXPECT_TRUE(phi_matches_task(inst));
        EXPECT_EQ(inst.task, t);
        const auto ids = encode_prompt(vocab, inst);
        EXPECT_EQ(ids.front(), vocab.bos());
        EXPECT_LE(ids.size(), 1024u);
        EXPECT_TRUE(vocab.can_encode(reference_output(inst)));
      }
    }
  }
}

TEST(AllTasks, ImpossibleEvalSplitThrows) {
  auto s = spec_for(TaskId::kMath);
  s.math.operand_max = 1;
  s.math.ops = "+";
  s.train_size = 200;
  s.eval_size = 10;
  EXPECT_THROW(generate_splits(s), InputError);
}

TEST(AllTasks, InvalidSpecsThrow) {
  auto s = spec_for(TaskId::kQa);
  s.qa.distractors = 0;
  EXPECT_THROW(validate_spec(s), InputError);
  s = spec_for(TaskId::kMath);
  s.math.ops = "^";
  EXPECT_THROW(validate_spec(s), InputError);
  s = spec_for(TaskId::kCode);
  s.code.ops = {"JUMP"};
  EXPECT_THROW(validate_spec(s), InputError);
  s = spec_for(TaskId::kWriting);
  s.writing.rubrics = {"nope"};
  EXPECT_THROW(validate_spec(s), InputError);
  s = spec_for(TaskId::kMath);
  s.train_size = 0;
  EXPECT_THROW(validate_spec(s), InputError);
}

TEST(Dataset, JsonlRoundTripAndSchemaChecks) {
  std::vector<PromptInstance> all;
  for (TaskId t : kAllTasks) {
    const auto v = generate(spec_for(t, 2), 10, Split::kEval);
    all.insert(all.end(), v.begin(), v.end());
  }
  std::istringstream in(jsonl(all));
  EXPECT_EQ(read_dataset(in), all);

  auto j = instance_to_json(all[0]);
  EXPECT_EQ(j["schema"], kDataSchema);
  j["schema"] = "omnirl-data-v0";
  EXPECT_THROW(instance_from_json(j), FormatError);
  j = instance_to_json(all[0]);
  j["task"] = "math";  // code phi under a math task
  if (all[0].task != TaskId::kMath) EXPECT_THROW(instance_from_json(j), FormatError);
  std::istringstream garbage("{not json\n");
  EXPECT_THROW(read_dataset(garbage), FormatError);
}

TEST(RenderPrompt, PrependsInstruction) {
  PromptInstance inst;
  inst.prompt = "3+4";
  EXPECT_EQ(render_prompt(inst), std::string(kInstruction) + "3+4");
}

}  // namespace
}  // namespace omnirl::taskgen
