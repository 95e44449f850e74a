#ifndef OMNIRL_CONFIG_H_
#define OMNIRL_CONFIG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnirl/judge.h"
#include "omnirl/mtgrpo.h"
#include "omnirl/policy.h"
#include "omnirl/scheduler.h"
#include "omnirl/taskgen.h"

namespace omnirl {

struct ModelSettings {
  PolicyConfig policy;
  double init_scale = 0.08;
  std::string init_checkpoint;  // empty = random init
  // Format-only SFT applied to a random init before RL; 0 steps disables.
  int warm_start_steps = 0;
  int warm_start_batch = 8;
  double warm_start_learning_rate = 1e-2;
};

struct ScheduleSettings {
  ScheduleMode mode = ScheduleMode::kJoint;
  std::vector<TaskId> tasks;          // joint: task set; staged: stage order
  std::vector<double> weights;        // joint; empty = uniform
  int64_t steps = 1000;               // joint: total optimizer steps
  int64_t steps_per_stage = 250;      // curriculum modes
  std::vector<int64_t> stage_steps;   // fixed_order
  // Replaces every per-task beta when the schedule mode matches and the run
  // has more than one task. A null entry in the config drops the mode.
  std::map<ScheduleMode, double> beta_by_mode;
};

struct JudgeSettings {
  bool remote = false;
  judge::RemoteJudgeConfig remote_config;
};

struct RftSettings {
  int samples_per_prompt = 16;
  int sft_steps = 0;
  int sft_batch = 8;
  double sft_learning_rate = 1e-2;
};

struct MergeSettings {
  double density = 0.2;
  double lambda = 1.0;
};

struct EvalSettings {
  int max_len = 16;
  int every = 0;  // steps between eval records; 0 = final only
};

struct RunConfig {
  std::string preset = "desk";
  uint64_t seed = 0;
  std::string out = "runs/default";
  ModelSettings model;
  TrainConfig train;
  std::map<TaskId, taskgen::TaskSpec> tasks;
  ScheduleSettings schedule;
  JudgeSettings judge;
  RftSettings rft;
  MergeSettings merge;
  EvalSettings eval;
  int checkpoint_every = 0;
};

// Built-in presets: "desk" and "paper-table3". Throws ConfigError otherwise.
nlohmann::json preset_json(const std::string& name);

// JSON merge patch: objects merge recursively, null deletes a key, anything
// else replaces.
nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& overlay);

// Strict parse: unknown keys, wrong types and broken invariants throw
// ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& c);

struct ConfigOverrides {
  std::optional<std::string> preset;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
};

// Preset (from the override, else the file's "preset" key, else "desk")
// overlaid with the file, then the overrides. An empty path uses the preset
// alone.
RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides = {});

// Training schedule described by the config.
TaskDistribution make_distribution(const RunConfig& c);
// TrainConfig with the seed and schedule-mode beta applied.
TrainConfig effective_train_config(const RunConfig& c);
std::unique_ptr<judge::Judge> make_judge(const RunConfig& c);

}  // namespace omnirl

#endif  // OMNIRL_CONFIG_H_
