#ifndef OMNIRL_RUN_H_
#define OMNIRL_RUN_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnirl/baselines.h"
#include "omnirl/bwt.h"
#include "omnirl/config.h"

namespace omnirl {

inline constexpr std::string_view kMetricsSchema = "omnirl-metrics-v1";

// Lowercase hex SHA-1 of the resolved config with the output directory
// removed, so identical settings share an id wherever they are written.
std::string run_id_for(const RunConfig& c);

struct PreparedRun {
  Vocabulary vocab;
  PolicyParams init;
  std::map<TaskId, std::vector<PromptInstance>> train_sets;  // every configured task
  std::map<TaskId, std::vector<PromptInstance>> eval_sets;
};

// Datasets for every task in c.tasks and the initial policy: the init
// checkpoint if given, else a seeded random init followed by the format warm
// start (skipped when warm_start is false).
PreparedRun prepare_run(const RunConfig& c, bool warm_start = true, std::ostream* log = nullptr);

struct TrainOutcome {
  std::filesystem::path dir;
  std::string run_id;
  PerformanceSnapshot final_eval;
};

// Trains on the scheduled tasks and evaluates on every configured task.
// Writes config.json, run_id, metrics.jsonl, checkpoint.bin, summary.json,
// summary.md and final_eval.csv under c.out. With dry_run nothing is written; the datasets are
// still generated to validate the task specs.
TrainOutcome cmd_train(const RunConfig& c, bool dry_run, std::ostream& log);

enum class EvalResponder { kPolicy, kReference };

// Greedy evaluation of a checkpoint on a dataset's instances (all splits).
PerformanceSnapshot cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset,
                             judge::Judge& judge, int max_len, EvalResponder responder = EvalResponder::kPolicy);

struct BwtReport {
  BWTMatrix matrix;
  std::vector<TaskId> ordering;
};

// Builds the matrix from snapshot files and writes matrix.csv, matrix.json and
// ordering.json into out_dir (skipped when empty).
BwtReport cmd_bwt(const std::filesystem::path& base, const std::map<TaskId, std::filesystem::path>& runs,
                  const std::filesystem::path& out_dir);
nlohmann::json bwt_report_to_json(const BwtReport& r);

void cmd_merge(const std::filesystem::path& base, const std::vector<std::filesystem::path>& models, double density,
               double lambda, const std::filesystem::path& out);

struct RftOutcome {
  RftDataset data;
  std::optional<double> final_sft_loss;
};

// Rejection-samples the dataset's train instances. stub_reward, when set,
// replaces the verifiers with a constant primary reward. With sft_steps > 0
// and a nonempty dataset the checkpoint is fine-tuned and written to
// sft_checkpoint.
RftOutcome cmd_rft(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, const RunConfig& c,
                   const std::filesystem::path& out, std::optional<double> stub_reward,
                   const std::filesystem::path& sft_checkpoint, std::ostream& log);

// Writes <task>.train.jsonl and <task>.eval.jsonl for every configured task.
void cmd_gen(const RunConfig& c, const std::filesystem::path& out_dir);

// Schema checks for emitted files. kind is one of config, dataset, checkpoint,
// metrics, snapshot. Throws the matching error on failure; returns a short
// description on success.
std::string cmd_validate(const std::string& kind, const std::filesystem::path& path);

}  // namespace omnirl

#endif  // OMNIRL_RUN_H_
