#include "omnirl/task.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "omnirl/errors.h"

namespace omnirl {

using nlohmann::json;

std::string_view task_name(TaskId t) {
  switch (t) {
    case TaskId::kCode: return "code";
    case TaskId::kMath: return "math";
    case TaskId::kQa: return "qa";
    case TaskId::kWriting: return "writing";
  }
  return "unknown";
}

TaskId task_from_name(std::string_view name) {
  for (TaskId t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw InputError("unknown task id: " + std::string(name));
}

std::string_view answer_format_name(AnswerFormat f) {
  return f == AnswerFormat::kFullText ? "full_text" : "letter_choice";
}

std::string_view split_name(Split s) { return s == Split::kTrain ? "train" : "eval"; }

bool phi_matches_task(const PromptInstance& inst) {
  switch (inst.task) {
    case TaskId::kMath: return std::holds_alternative<MathPhi>(inst.phi);
    case TaskId::kCode: return std::holds_alternative<CodePhi>(inst.phi);
    case TaskId::kQa: return std::holds_alternative<QaPhi>(inst.phi);
    case TaskId::kWriting: return std::holds_alternative<WritingPhi>(inst.phi);
  }
  return false;
}

namespace {

json phi_to_json(const Phi& phi) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MathPhi>) {
          return {{"answer", p.answer}};
        } else if constexpr (std::is_same_v<T, CodePhi>) {
          return {{"tests", vm::test_cases_to_json(p.tests)}, {"reference", p.reference_program}};
        } else if constexpr (std::is_same_v<T, QaPhi>) {
          return {{"answer", p.answer}, {"candidates", p.candidates}};
        } else {
          return {{"reference", p.reference}, {"rubric", p.rubric}};
        }
      },
      phi);
}

void require_keys(const json& j, std::initializer_list<std::string_view> keys, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + " must be an object");
  for (auto k : keys) {
    if (!j.contains(k)) throw FormatError(std::string(what) + " missing key '" + std::string(k) + "'");
  }
  if (j.size() != keys.size()) throw FormatError(std::string(what) + " has unexpected keys");
}

Phi phi_from_json(TaskId task, const json& j) {
  switch (task) {
    case TaskId::kMath:
      require_keys(j, {"answer"}, "math phi");
      return MathPhi{j.at("answer").get<std::string>()};
    case TaskId::kCode: {
      require_keys(j, {"tests", "reference"}, "code phi");
      CodePhi p{vm::test_cases_from_json(j.at("tests")), j.at("reference").get<std::string>()};
      if (p.tests.empty()) throw FormatError("code phi needs at least one test case");
      return p;
    }
    case TaskId::kQa: {
      require_keys(j, {"answer", "candidates"}, "qa phi");
      return QaPhi{j.at("answer").get<std::string>(), j.at("candidates").get<std::vector<std::string>>()};
    }
    case TaskId::kWriting:
      require_keys(j, {"reference", "rubric"}, "writing phi");
      return WritingPhi{j.at("reference").get<std::string>(), j.at("rubric").get<std::string>()};
  }
  throw FormatError("unknown task");
}

}  // namespace

json instance_to_json(const PromptInstance& inst) {
  return {
      {"schema", kDataSchema},
      {"task", task_name(inst.task)},
      {"prompt", inst.prompt},
      {"phi", phi_to_json(inst.phi)},
      {"answer_format", answer_format_name(inst.answer_format)},
      {"split", split_name(inst.split)},
  };
}

PromptInstance instance_from_json(const json& j) {
  try {
    if (!j.is_object()) throw FormatError("record must be a JSON object");
    if (j.value("schema", "") != kDataSchema) throw FormatError("record schema is not omnirl-data-v1");
    PromptInstance inst;
    try {
      inst.task = task_from_name(j.at("task").get<std::string>());
    } catch (const InputError& e) {
      throw FormatError(e.what());
    }
    inst.prompt = j.at("prompt").get<std::string>();
    if (inst.prompt.empty()) throw FormatError("empty prompt");
    inst.phi = phi_from_json(inst.task, j.at("phi"));
    const std::string fmt = j.at("answer_format").get<std::string>();
    if (fmt == "full_text") {
      inst.answer_format = AnswerFormat::kFullText;
    } else if (fmt == "letter_choice") {
      inst.answer_format = AnswerFormat::kLetterChoice;
    } else {
      throw FormatError("unknown answer_format: " + fmt);
    }
    const std::string split = j.at("split").get<std::string>();
    if (split == "train") {
      inst.split = Split::kTrain;
    } else if (split == "eval") {
      inst.split = Split::kEval;
    } else {
      throw FormatError("unknown split: " + split);
    }
    if (inst.task == TaskId::kQa) {
      const auto& qa = std::get<QaPhi>(inst.phi);
      if (inst.answer_format == AnswerFormat::kFullText) {
        if (std::count(qa.candidates.begin(), qa.candidates.end(), qa.answer) != 1) {
          throw FormatError("qa candidates must contain the reference exactly once");
        }
      } else if (qa.answer.size() != 1 || qa.answer[0] < 'A' ||
                 qa.answer[0] >= 'A' + static_cast<int>(qa.candidates.size())) {
        throw FormatError("letter_choice answer must label one of the candidates");
      }
    }
    return inst;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed data record: ") + e.what());
  }
}

std::string instance_key(const PromptInstance& inst) {
  return std::string(task_name(inst.task)) + "\x1f" + inst.prompt + "\x1f" + phi_to_json(inst.phi).dump();
}

void write_dataset(std::ostream& out, std::span<const PromptInstance> instances) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
  if (!out) throw IoError("failed to write dataset");
}

std::vector<PromptInstance> read_dataset(std::istream& in) {
  std::vector<PromptInstance> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, std::span<const PromptInstance> instances) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, instances);
}

std::vector<PromptInstance> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace omnirl
