#include "omnirl/scheduler.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "omnirl/errors.h"

namespace omnirl {
namespace {

void check_permutation(std::span<const TaskId> ordering) {
  if (ordering.empty()) throw InputError("task ordering is empty");
  std::set<TaskId> seen(ordering.begin(), ordering.end());
  if (seen.size() != ordering.size()) throw InputError("task ordering repeats a task");
}

void check_weights(std::span<const TaskId> tasks, std::span<const double> weights) {
  if (tasks.empty()) throw InputError("joint sampling needs at least one task");
  if (weights.size() != tasks.size()) throw InputError("one weight per task required");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("task weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("task weights must sum to 1");
}

}  // namespace

std::string_view schedule_mode_name(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::kJoint: return "joint";
    case ScheduleMode::kCurriculum: return "curriculum";
    case ScheduleMode::kReverseCurriculum: return "reverse_curriculum";
    case ScheduleMode::kFixedOrder: return "fixed_order";
  }
  return "?";
}

ScheduleMode schedule_mode_from_name(std::string_view name) {
  for (auto m : {ScheduleMode::kJoint, ScheduleMode::kCurriculum, ScheduleMode::kReverseCurriculum,
                 ScheduleMode::kFixedOrder}) {
    if (schedule_mode_name(m) == name) return m;
  }
  throw InputError("unknown schedule mode: " + std::string(name));
}

int64_t TaskDistribution::total_steps() const {
  if (!staged()) return joint_steps;
  return stage_ends.empty() ? 0 : stage_ends.back();
}

void TaskDistribution::validate() const {
  check_permutation(tasks);
  if (!staged()) {
    check_weights(tasks, weights);
    if (joint_steps < 0) throw InputError("joint step budget must be >= 0");
    return;
  }
  if (stage_ends.size() != tasks.size()) throw InputError("one stage per task required");
  int64_t prev = 0;
  for (int64_t e : stage_ends) {
    if (e <= prev) throw InputError("stage boundaries must be strictly increasing");
    prev = e;
  }
}

JointSampler::JointSampler(std::vector<TaskId> tasks, std::vector<double> weights, uint64_t seed)
    : tasks_(std::move(tasks)), rng_(seed) {
  if (weights.empty() && !tasks_.empty()) weights.assign(tasks_.size(), 1.0 / static_cast<double>(tasks_.size()));
  check_weights(tasks_, weights);
  double acc = 0.0;
  for (double w : weights) cumulative_.push_back(acc += w);
}

TaskId JointSampler::next() {
  const double u = rng_.uniform() * cumulative_.back();
  for (size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) return tasks_[i];
  }
  // Only reachable through rounding; return the last task with positive weight.
  for (size_t i = cumulative_.size(); i-- > 0;) {
    if (i == 0 || cumulative_[i] > cumulative_[i - 1]) return tasks_[i];
  }
  return tasks_.back();
}

JointSampler joint_sampler(std::vector<TaskId> tasks, std::vector<double> weights, uint64_t seed) {
  return JointSampler(std::move(tasks), std::move(weights), seed);
}

TaskDistribution joint_distribution(std::vector<TaskId> tasks, int64_t steps, std::vector<double> weights) {
  TaskDistribution d;
  d.mode = ScheduleMode::kJoint;
  if (weights.empty() && !tasks.empty()) weights.assign(tasks.size(), 1.0 / static_cast<double>(tasks.size()));
  d.tasks = std::move(tasks);
  d.weights = std::move(weights);
  d.joint_steps = steps;
  d.validate();
  return d;
}

TaskDistribution fixed_order(std::span<const TaskId> ordering, std::span<const int64_t> stage_steps) {
  check_permutation(ordering);
  if (stage_steps.size() != ordering.size()) throw InputError("one step budget per stage required");
  TaskDistribution d;
  d.mode = ScheduleMode::kFixedOrder;
  d.tasks.assign(ordering.begin(), ordering.end());
  int64_t end = 0;
  for (int64_t s : stage_steps) {
    if (s < 1) throw InputError("stage step budgets must be >= 1");
    d.stage_ends.push_back(end += s);
  }
  return d;
}

TaskDistribution curriculum_stages(std::span<const TaskId> ordering, int64_t steps_per_stage) {
  std::vector<int64_t> steps(ordering.size(), steps_per_stage);
  TaskDistribution d = fixed_order(ordering, steps);
  d.mode = ScheduleMode::kCurriculum;
  return d;
}

TaskDistribution reverse_curriculum(std::span<const TaskId> ordering, int64_t steps_per_stage) {
  std::vector<TaskId> reversed(ordering.rbegin(), ordering.rend());
  TaskDistribution d = curriculum_stages(reversed, steps_per_stage);
  d.mode = ScheduleMode::kReverseCurriculum;
  return d;
}

std::vector<ScheduledStep> materialize(const TaskDistribution& dist, uint64_t seed) {
  dist.validate();
  std::vector<ScheduledStep> out;
  out.reserve(static_cast<size_t>(dist.total_steps()));
  if (!dist.staged()) {
    JointSampler sampler(dist.tasks, dist.weights, mix_seed(seed, 0x6a6f696eULL));
    for (int64_t s = 0; s < dist.joint_steps; ++s) out.push_back({sampler.next(), 0});
    return out;
  }
  int64_t step = 0;
  for (size_t s = 0; s < dist.tasks.size(); ++s) {
    for (; step < dist.stage_ends[s]; ++step) out.push_back({dist.tasks[s], static_cast<int>(s)});
  }
  return out;
}

std::vector<TaskId> order_by_bwt(const std::map<TaskId, double>& avg_bwt_received) {
  std::vector<std::pair<TaskId, double>> items(avg_bwt_received.begin(), avg_bwt_received.end());
  for (const auto& [t, v] : items) {
    if (!std::isfinite(v)) throw InputError("non-finite BWT average for " + std::string(task_name(t)));
  }
  // Lexicographic by name first, then a stable sort on the value.
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return task_name(a.first) < task_name(b.first); });
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<TaskId> out;
  for (const auto& [t, v] : items) out.push_back(t);
  return out;
}

nlohmann::json distribution_to_json(const TaskDistribution& dist) {
  nlohmann::json j;
  j["mode"] = schedule_mode_name(dist.mode);
  j["tasks"] = nlohmann::json::array();
  for (TaskId t : dist.tasks) j["tasks"].push_back(task_name(t));
  if (dist.staged()) {
    j["stage_ends"] = dist.stage_ends;
  } else {
    j["weights"] = dist.weights;
    j["steps"] = dist.joint_steps;
  }
  return j;
}

TaskDistribution distribution_from_json(const nlohmann::json& j) {
  try {
    TaskDistribution d;
    d.mode = schedule_mode_from_name(j.at("mode").get<std::string>());
    for (const auto& t : j.at("tasks")) d.tasks.push_back(task_from_name(t.get<std::string>()));
    if (d.staged()) {
      d.stage_ends = j.at("stage_ends").get<std::vector<int64_t>>();
    } else {
      d.weights = j.at("weights").get<std::vector<double>>();
      d.joint_steps = j.at("steps").get<int64_t>();
    }
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad schedule record: ") + e.what());
  }
}

}  // namespace omnirl
