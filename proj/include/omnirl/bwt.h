#ifndef OMNIRL_BWT_H_
#define OMNIRL_BWT_H_

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnirl/judge.h"
#include "omnirl/policy.h"
#include "omnirl/task.h"
#include "omnirl/vocabulary.h"

namespace omnirl {

// Per-task performance of one model.
struct PerformanceSnapshot {
  std::string model_tag;
  std::string timestamp;  // free-form; empty in deterministic outputs
  std::map<TaskId, double> values;

  bool operator==(const PerformanceSnapshot&) const = default;
};

// Maps a prompt instance to the raw output text to be scored.
using Responder = std::function<std::string(const PromptInstance&)>;

// Mean primary reward per task over each eval split, greedy decoding.
// Undefined primary rewards count as 0.
PerformanceSnapshot evaluate_tasks(const PolicyParams& policy, const Vocabulary& vocab,
                                   const std::map<TaskId, std::vector<PromptInstance>>& eval_splits,
                                   judge::Judge& judge, int max_len, std::string model_tag = "");
PerformanceSnapshot evaluate_tasks(const Responder& respond,
                                   const std::map<TaskId, std::vector<PromptInstance>>& eval_splits,
                                   judge::Judge& judge, std::string model_tag = "");

double bwt_value(double p_after, double p_base);

// Rows are source tasks (one training run each), columns target tasks.
struct BWTMatrix {
  std::vector<TaskId> tasks;
  std::vector<std::vector<double>> cells;  // cells[source][target]
  std::vector<double> column_averages;     // off-diagonal mean per target

  double at(TaskId source, TaskId target) const;
  std::map<TaskId, double> averages() const;
};

// Throws InputError when a source run is missing or task sets differ.
BWTMatrix build_matrix(const PerformanceSnapshot& base, const std::map<TaskId, PerformanceSnapshot>& after);

// BWT within one staged run: for each task trained before the last stage,
// final performance minus performance right after its own stage.
// stage_ends[i] is the snapshot taken when stage i finished; the last one is
// the final model. Throws InputError on length or task-set mismatches.
std::map<TaskId, double> sequential_bwt(std::span<const TaskId> stage_tasks,
                                        std::span<const PerformanceSnapshot> stage_ends);

nlohmann::json snapshot_to_json(const PerformanceSnapshot& s);
PerformanceSnapshot snapshot_from_json(const nlohmann::json& j);
void write_snapshot_csv(std::ostream& out, const PerformanceSnapshot& s);
PerformanceSnapshot read_snapshot_csv(std::istream& in);
// Reads .json or .csv by extension.
PerformanceSnapshot load_snapshot(const std::string& path);

nlohmann::json matrix_to_json(const BWTMatrix& m);
// Header "source,<targets...>", one row per source, then an "average" row.
void write_matrix_csv(std::ostream& out, const BWTMatrix& m);

}  // namespace omnirl

#endif  // OMNIRL_BWT_H_
