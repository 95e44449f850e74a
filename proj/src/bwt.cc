#include "omnirl/bwt.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "omnirl/errors.h"
#include "omnirl/taskgen.h"
#include "omnirl/verifiers.h"

namespace omnirl {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

PerformanceSnapshot evaluate_tasks(const Responder& respond,
                                   const std::map<TaskId, std::vector<PromptInstance>>& eval_splits,
                                   judge::Judge& judge, std::string model_tag) {
  PerformanceSnapshot snap;
  snap.model_tag = std::move(model_tag);
  for (const auto& [task, split] : eval_splits) {
    if (split.empty()) throw InputError("empty eval split for " + std::string(task_name(task)));
    double sum = 0.0;
    for (const auto& inst : split) {
      if (inst.task != task) throw InputError("eval instance filed under the wrong task");
      sum += verifiers::primary_reward(inst, respond(inst), judge).value_or(0.0);
    }
    snap.values[task] = sum / static_cast<double>(split.size());
  }
  return snap;
}

PerformanceSnapshot evaluate_tasks(const PolicyParams& policy, const Vocabulary& vocab,
                                   const std::map<TaskId, std::vector<PromptInstance>>& eval_splits,
                                   judge::Judge& judge, int max_len, std::string model_tag) {
  const Responder greedy = [&](const PromptInstance& inst) {
    const auto prompt = taskgen::encode_prompt(vocab, inst);
    return vocab.decode(greedy_completion(policy, prompt, max_len));
  };
  return evaluate_tasks(greedy, eval_splits, judge, std::move(model_tag));
}

double bwt_value(double p_after, double p_base) { return p_after - p_base; }

double BWTMatrix::at(TaskId source, TaskId target) const {
  size_t s = tasks.size(), t = tasks.size();
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i] == source) s = i;
    if (tasks[i] == target) t = i;
  }
  if (s == tasks.size() || t == tasks.size()) throw InputError("task not in BWT matrix");
  return cells[s][t];
}

std::map<TaskId, double> BWTMatrix::averages() const {
  std::map<TaskId, double> out;
  for (size_t i = 0; i < tasks.size(); ++i) out[tasks[i]] = column_averages[i];
  return out;
}

BWTMatrix build_matrix(const PerformanceSnapshot& base, const std::map<TaskId, PerformanceSnapshot>& after) {
  BWTMatrix m;
  for (const auto& [t, v] : base.values) {
    if (!std::isfinite(v)) throw InputError("non-finite base performance");
    m.tasks.push_back(t);
  }
  if (m.tasks.empty()) throw InputError("base snapshot has no tasks");
  for (TaskId source : m.tasks) {
    const auto it = after.find(source);
    if (it == after.end()) throw InputError("missing after-snapshot for source task " + std::string(task_name(source)));
    if (it->second.values.size() != base.values.size()) throw InputError("snapshot task sets differ");
    std::vector<double> row;
    for (TaskId target : m.tasks) {
      const auto v = it->second.values.find(target);
      if (v == it->second.values.end()) throw InputError("snapshot task sets differ");
      if (!std::isfinite(v->second)) throw InputError("non-finite performance value");
      row.push_back(bwt_value(v->second, base.values.at(target)));
    }
    m.cells.push_back(std::move(row));
  }
  if (after.size() != m.tasks.size()) throw InputError("after-snapshot for a task outside the base set");
  const size_t n = m.tasks.size();
  for (size_t t = 0; t < n; ++t) {
    // The diagonal is learning on the task itself, not transfer.
    double sum = 0.0;
    for (size_t s = 0; s < n; ++s) {
      if (s != t) sum += m.cells[s][t];
    }
    m.column_averages.push_back(n > 1 ? sum / static_cast<double>(n - 1) : 0.0);
  }
  return m;
}

std::map<TaskId, double> sequential_bwt(std::span<const TaskId> stage_tasks,
                                        std::span<const PerformanceSnapshot> stage_ends) {
  if (stage_tasks.empty() || stage_tasks.size() != stage_ends.size()) {
    throw InputError("one stage-end snapshot per stage required");
  }
  const PerformanceSnapshot& last = stage_ends.back();
  std::map<TaskId, double> out;
  for (size_t i = 0; i + 1 < stage_tasks.size(); ++i) {
    const TaskId t = stage_tasks[i];
    const auto now = stage_ends[i].values.find(t);
    const auto end = last.values.find(t);
    if (now == stage_ends[i].values.end() || end == last.values.end()) {
      throw InputError("stage snapshot lacks task " + std::string(task_name(t)));
    }
    out[t] = bwt_value(end->second, now->second);
  }
  return out;
}

nlohmann::json snapshot_to_json(const PerformanceSnapshot& s) {
  nlohmann::json j;
  j["model_tag"] = s.model_tag;
  if (!s.timestamp.empty()) j["timestamp"] = s.timestamp;
  j["values"] = nlohmann::json::object();
  for (const auto& [t, v] : s.values) j["values"][std::string(task_name(t))] = v;
  return j;
}

PerformanceSnapshot snapshot_from_json(const nlohmann::json& j) {
  try {
    PerformanceSnapshot s;
    s.model_tag = j.value("model_tag", "");
    s.timestamp = j.value("timestamp", "");
    for (const auto& [k, v] : j.at("values").items()) {
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw FormatError("non-finite snapshot value");
      s.values[task_from_name(k)] = x;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad snapshot: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("bad snapshot: ") + e.what());
  }
}

void write_snapshot_csv(std::ostream& out, const PerformanceSnapshot& s) {
  std::string header, row;
  for (const auto& [t, v] : s.values) {
    header += (header.empty() ? "" : ",") + std::string(task_name(t));
    row += (row.empty() ? "" : ",") + format_value(v);
  }
  out << header << "\n" << row << "\n";
}

PerformanceSnapshot read_snapshot_csv(std::istream& in) {
  std::string header, row;
  if (!std::getline(in, header) || !std::getline(in, row)) throw FormatError("snapshot CSV needs a header and a row");
  const auto names = split_csv_line(header);
  const auto cells = split_csv_line(row);
  if (names.size() != cells.size() || names.empty()) throw FormatError("snapshot CSV row width mismatch");
  PerformanceSnapshot s;
  for (size_t i = 0; i < names.size(); ++i) {
    try {
      size_t used = 0;
      const double v = std::stod(cells[i], &used);
      if (used != cells[i].size() || !std::isfinite(v)) throw FormatError("bad value");
      s.values[task_from_name(names[i])] = v;
    } catch (const std::logic_error&) {
      throw FormatError("bad snapshot CSV cell: " + cells[i]);
    } catch (const InputError& e) {
      throw FormatError(e.what());
    }
  }
  return s;
}

PerformanceSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open snapshot " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return read_snapshot_csv(in);
  try {
    return snapshot_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("snapshot " + path + ": " + e.what());
  }
}

nlohmann::json matrix_to_json(const BWTMatrix& m) {
  nlohmann::json j;
  j["tasks"] = nlohmann::json::array();
  for (TaskId t : m.tasks) j["tasks"].push_back(task_name(t));
  j["cells"] = m.cells;
  j["average_bwt_received"] = nlohmann::json::object();
  for (size_t i = 0; i < m.tasks.size(); ++i) j["average_bwt_received"][std::string(task_name(m.tasks[i]))] = m.column_averages[i];
  return j;
}

void write_matrix_csv(std::ostream& out, const BWTMatrix& m) {
  out << "source";
  for (TaskId t : m.tasks) out << "," << task_name(t);
  out << "\n";
  for (size_t s = 0; s < m.tasks.size(); ++s) {
    out << task_name(m.tasks[s]);
    for (double v : m.cells[s]) out << "," << format_value(v);
    out << "\n";
  }
  out << "average";
  for (double v : m.column_averages) out << "," << format_value(v);
  out << "\n";
}

}  // namespace omnirl
