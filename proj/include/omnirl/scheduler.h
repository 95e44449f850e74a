#ifndef OMNIRL_SCHEDULER_H_
#define OMNIRL_SCHEDULER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "omnirl/rng.h"
#include "omnirl/task.h"

namespace omnirl {

enum class ScheduleMode { kJoint, kCurriculum, kReverseCurriculum, kFixedOrder };

std::string_view schedule_mode_name(ScheduleMode m);
ScheduleMode schedule_mode_from_name(std::string_view name);

// Task exposure over training steps.
//
// Joint mode draws each step's task i.i.d. from `weights` over `tasks`.
// Staged modes train tasks[s] exclusively for steps
// [stage_ends[s-1], stage_ends[s]).
struct TaskDistribution {
  ScheduleMode mode = ScheduleMode::kJoint;
  std::vector<TaskId> tasks;
  std::vector<double> weights;       // joint only
  std::vector<int64_t> stage_ends;   // staged only, strictly increasing
  int64_t joint_steps = 0;           // joint only

  bool staged() const { return mode != ScheduleMode::kJoint; }
  int64_t total_steps() const;
  // Throws InputError when an invariant is broken.
  void validate() const;
};

// Infinite i.i.d. task stream.
class JointSampler {
 public:
  JointSampler(std::vector<TaskId> tasks, std::vector<double> weights, uint64_t seed);
  TaskId next();

 private:
  std::vector<TaskId> tasks_;
  std::vector<double> cumulative_;
  Rng rng_;
};

JointSampler joint_sampler(std::vector<TaskId> tasks, std::vector<double> weights, uint64_t seed);

TaskDistribution joint_distribution(std::vector<TaskId> tasks, int64_t steps,
                                    std::vector<double> weights = {});

// Equal step budget per stage, in `ordering`.
TaskDistribution curriculum_stages(std::span<const TaskId> ordering, int64_t steps_per_stage);
TaskDistribution reverse_curriculum(std::span<const TaskId> ordering, int64_t steps_per_stage);
// Staged schedule with explicit per-stage budgets.
TaskDistribution fixed_order(std::span<const TaskId> ordering, std::span<const int64_t> stage_steps);

struct ScheduledStep {
  TaskId task;
  int stage;  // 0 for joint mode
};

// One entry per optimizer step.
std::vector<ScheduledStep> materialize(const TaskDistribution& dist, uint64_t seed);

// Descending by average BWT received, ties in task-name order.
std::vector<TaskId> order_by_bwt(const std::map<TaskId, double>& avg_bwt_received);

nlohmann::json distribution_to_json(const TaskDistribution& dist);
TaskDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace omnirl

#endif  // OMNIRL_SCHEDULER_H_
