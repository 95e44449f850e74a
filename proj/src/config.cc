#include "omnirl/config.h"

#include <cstdlib>
#include <fstream>
#include <set>

#include "omnirl/errors.h"

namespace omnirl {
namespace {

using nlohmann::json;

// Reads keys out of one JSON object and rejects anything left unread.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + where(k));
    }
  }

  std::string where(const std::string& key = "") const {
    return key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TaskId parse_task(const std::string& name, const std::string& where) {
  try {
    return task_from_name(name);
  } catch (const InputError&) {
    throw ConfigError(where + ": unknown task '" + name + "'");
  }
}

ScheduleMode parse_mode(const std::string& name, const std::string& where) {
  try {
    return schedule_mode_from_name(name);
  } catch (const InputError&) {
    throw ConfigError(where + ": unknown schedule mode '" + name + "'");
  }
}

AnswerFormat parse_answer_format(const std::string& name) {
  if (name == "full_text") return AnswerFormat::kFullText;
  if (name == "letter_choice") return AnswerFormat::kLetterChoice;
  throw ConfigError("answer_format must be full_text or letter_choice");
}

std::optional<double> parse_weight(const json& obj, const char* key, std::optional<double> fallback,
                                   const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number or null");
  return it->get<double>();
}

void parse_model(const json& j, ModelSettings& m) {
  Reader r(j, "model");
  r.get("vocab_size", m.policy.vocab_size);
  r.get("embed_dim", m.policy.embed_dim);
  r.get("context", m.policy.context);
  r.get("hidden", m.policy.hidden);
  r.get("init_scale", m.init_scale);
  r.get("init_checkpoint", m.init_checkpoint);
  r.get("warm_start_steps", m.warm_start_steps);
  r.get("warm_start_batch", m.warm_start_batch);
  r.get("warm_start_learning_rate", m.warm_start_learning_rate);
  r.finish();
  if (m.warm_start_steps < 0 || m.warm_start_batch < 1 || !(m.warm_start_learning_rate >= 0.0)) {
    throw ConfigError("model warm start settings out of range");
  }
  if (m.policy.embed_dim < 1 || m.policy.context < 1 || m.policy.hidden < 1) {
    throw ConfigError("model dimensions must be >= 1");
  }
  if (!(m.init_scale >= 0.0)) throw ConfigError("model.init_scale must be >= 0");
}

void parse_train(const json& j, TrainConfig& t) {
  Reader r(j, "train");
  r.get("group_size", t.group_size);
  r.get("clip_eps", t.clip_eps);
  if (const json* b = r.child("beta")) {
    if (!b->is_object()) throw ConfigError("train.beta must be an object");
    for (const auto& [k, v] : b->items()) {
      if (!v.is_number()) throw ConfigError("train.beta." + k + " must be a number");
      t.beta[parse_task(k, "train.beta")] = v.get<double>();
    }
  }
  r.get("sigma_floor", t.sigma_floor);
  r.get("learning_rate", t.learning_rate);
  r.get("weight_decay", t.weight_decay);
  r.get("adam_beta1", t.adamw.beta1);
  r.get("adam_beta2", t.adamw.beta2);
  r.get("adam_eps", t.adamw.eps);
  r.get("grad_clip", t.adamw.grad_clip);
  r.get("batch_size", t.batch_size);
  r.get("inner_epochs", t.inner_epochs);
  r.get("max_epochs", t.max_epochs);
  r.get("mixed_batches", t.mixed_batches);
  r.get("reset_optimizer_between_stages", t.reset_optimizer_between_stages);
  std::string ref = t.ref_policy == RefPolicy::kStageStart ? "stage_start" : "train_start";
  r.get("ref_policy", ref);
  if (ref == "stage_start") {
    t.ref_policy = RefPolicy::kStageStart;
  } else if (ref == "train_start") {
    t.ref_policy = RefPolicy::kTrainStart;
  } else {
    throw ConfigError("train.ref_policy must be stage_start or train_start");
  }
  r.get("temperature", t.decoding.temperature);
  r.get("top_k", t.decoding.top_k);
  r.get("max_len", t.decoding.max_len);
  if (const json* w = r.child("reward_weights")) {
    if (!w->is_object()) throw ConfigError("train.reward_weights must be an object");
    for (const auto& [k, v] : w->items()) {
      const std::string where = "train.reward_weights." + k;
      if (!v.is_object()) throw ConfigError(where + " must be an object");
      for (const auto& [wk, wv] : v.items()) {
        if (wk != "primary" && wk != "format" && wk != "tags") throw ConfigError("unknown key " + where + "." + wk);
      }
      const verifiers::RewardWeights d;
      verifiers::RewardWeights rw;
      rw.primary = parse_weight(v, "primary", d.primary, where);
      rw.format = parse_weight(v, "format", d.format, where);
      rw.tags = parse_weight(v, "tags", d.tags, where);
      t.reward_weights[parse_task(k, "train.reward_weights")] = rw;
    }
  }
  r.finish();
  t.validate();
}

void parse_task_spec(const json& j, TaskId task, taskgen::TaskSpec& s, bool& seed_given) {
  const std::string path = "tasks." + std::string(task_name(task));
  Reader r(j, path);
  s.task = task;
  r.get("train_size", s.train_size);
  r.get("eval_size", s.eval_size);
  seed_given = j.contains("seed");
  r.get("seed", s.seed);
  switch (task) {
    case TaskId::kMath:
      r.get("operand_min", s.math.operand_min);
      r.get("operand_max", s.math.operand_max);
      r.get("operands_min", s.math.operands_min);
      r.get("operands_max", s.math.operands_max);
      r.get("ops", s.math.ops);
      r.get("fixed_operands", s.math.fixed_operands);
      break;
    case TaskId::kCode:
      r.get("program_len_min", s.code.program_len_min);
      r.get("program_len_max", s.code.program_len_max);
      r.get("inputs", s.code.inputs);
      r.get("input_min", s.code.input_min);
      r.get("input_max", s.code.input_max);
      r.get("tests_min", s.code.tests_min);
      r.get("tests_max", s.code.tests_max);
      r.get("push_min", s.code.push_min);
      r.get("push_max", s.code.push_max);
      r.get("ops", s.code.ops);
      break;
    case TaskId::kQa: {
      r.get("distractors", s.qa.distractors);
      std::string fmt(answer_format_name(s.qa.answer_format));
      r.get("answer_format", fmt);
      s.qa.answer_format = parse_answer_format(fmt);
      r.get("entities", s.qa.entities);
      r.get("answer_len_min", s.qa.answer_len_min);
      r.get("answer_len_max", s.qa.answer_len_max);
      r.get("numeric_fraction", s.qa.numeric_fraction);
      r.get("world_seed", s.qa.world_seed);
      break;
    }
    case TaskId::kWriting:
      r.get("rubrics", s.writing.rubrics);
      r.get("reference_words_min", s.writing.reference_words_min);
      r.get("reference_words_max", s.writing.reference_words_max);
      break;
  }
  r.finish();
  try {
    taskgen::validate_spec(s);
  } catch (const InputError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json task_spec_to_json(const taskgen::TaskSpec& s) {
  json j{{"train_size", s.train_size}, {"eval_size", s.eval_size}, {"seed", s.seed}};
  switch (s.task) {
    case TaskId::kMath:
      j.update({{"operand_min", s.math.operand_min},
                {"operand_max", s.math.operand_max},
                {"operands_min", s.math.operands_min},
                {"operands_max", s.math.operands_max},
                {"ops", s.math.ops},
                {"fixed_operands", s.math.fixed_operands}});
      break;
    case TaskId::kCode:
      j.update({{"program_len_min", s.code.program_len_min},
                {"program_len_max", s.code.program_len_max},
                {"inputs", s.code.inputs},
                {"input_min", s.code.input_min},
                {"input_max", s.code.input_max},
                {"tests_min", s.code.tests_min},
                {"tests_max", s.code.tests_max},
                {"push_min", s.code.push_min},
                {"push_max", s.code.push_max},
                {"ops", s.code.ops}});
      break;
    case TaskId::kQa:
      j.update({{"distractors", s.qa.distractors},
                {"answer_format", answer_format_name(s.qa.answer_format)},
                {"entities", s.qa.entities},
                {"answer_len_min", s.qa.answer_len_min},
                {"answer_len_max", s.qa.answer_len_max},
                {"numeric_fraction", s.qa.numeric_fraction},
                {"world_seed", s.qa.world_seed}});
      break;
    case TaskId::kWriting:
      j.update({{"rubrics", s.writing.rubrics},
                {"reference_words_min", s.writing.reference_words_min},
                {"reference_words_max", s.writing.reference_words_max}});
      break;
  }
  return j;
}

void parse_schedule(const json& j, ScheduleSettings& s) {
  Reader r(j, "schedule");
  std::string mode(schedule_mode_name(s.mode));
  r.get("mode", mode);
  s.mode = parse_mode(mode, "schedule.mode");
  std::vector<std::string> tasks;
  for (TaskId t : s.tasks) tasks.emplace_back(task_name(t));
  r.get("tasks", tasks);
  s.tasks.clear();
  for (const auto& t : tasks) s.tasks.push_back(parse_task(t, "schedule.tasks"));
  r.get("weights", s.weights);
  r.get("steps", s.steps);
  r.get("steps_per_stage", s.steps_per_stage);
  r.get("stage_steps", s.stage_steps);
  if (const json* b = r.child("beta_by_mode")) {
    if (!b->is_object()) throw ConfigError("schedule.beta_by_mode must be an object");
    s.beta_by_mode.clear();
    for (const auto& [k, v] : b->items()) {
      const ScheduleMode m = parse_mode(k, "schedule.beta_by_mode");
      if (v.is_null()) continue;  // null keeps the per-task betas
      if (!v.is_number() || v.get<double>() < 0.0) throw ConfigError("schedule.beta_by_mode." + k + " must be >= 0");
      s.beta_by_mode[m] = v.get<double>();
    }
  }
  r.finish();
}

void parse_judge(const json& j, JudgeSettings& s) {
  Reader r(j, "judge");
  std::string mode = s.remote ? "remote" : "oracle";
  r.get("mode", mode);
  if (mode != "oracle" && mode != "remote") throw ConfigError("judge.mode must be oracle or remote");
  s.remote = mode == "remote";
  r.get("endpoint", s.remote_config.endpoint);
  r.get("temperature", s.remote_config.temperature);
  r.get("both_orders", s.remote_config.both_orders);
  r.get("max_in_flight", s.remote_config.max_in_flight);
  r.get("timeout_seconds", s.remote_config.timeout_seconds);
  r.finish();
  if (s.remote && s.remote_config.endpoint.empty()) throw ConfigError("judge.mode remote requires judge.endpoint");
  if (s.remote_config.max_in_flight < 1) throw ConfigError("judge.max_in_flight must be >= 1");
  if (s.remote_config.timeout_seconds < 1) throw ConfigError("judge.timeout_seconds must be >= 1");
}

}  // namespace

json merge_json(json base, const json& overlay) {
  base.merge_patch(overlay);
  return base;
}

json preset_json(const std::string& name) {
  json desk = {
      {"preset", "desk"},
      {"seed", 0},
      {"out", "runs/desk"},
      {"model", {{"vocab_size", 96}, {"embed_dim", 16}, {"context", 8}, {"hidden", 64}, {"init_scale", 0.08},
                 {"init_checkpoint", ""}, {"warm_start_steps", 300}, {"warm_start_batch", 8},
                 {"warm_start_learning_rate", 1e-2}}},
      {"train",
       {{"group_size", 16},
        {"clip_eps", 0.2},
        {"beta", {{"code", 0.001}, {"math", 0.04}, {"qa", 0.04}, {"writing", 0.0}}},
        {"sigma_floor", 1e-8},
        {"learning_rate", 1e-3},
        {"weight_decay", 0.0},
        {"adam_beta1", 0.9},
        {"adam_beta2", 0.999},
        {"adam_eps", 1e-8},
        {"grad_clip", 1.0},
        {"batch_size", 8},
        {"inner_epochs", 1},
        {"max_epochs", 0},
        {"mixed_batches", false},
        {"reset_optimizer_between_stages", false},
        {"ref_policy", "stage_start"},
        {"temperature", 1.0},
        {"top_k", 50},
        {"max_len", 16},
        {"reward_weights", json::object()}}},
      {"tasks",
       {{"code", {{"train_size", 512}, {"eval_size", 128}}},
        {"math", {{"train_size", 512}, {"eval_size", 128}}},
        {"qa", {{"train_size", 512}, {"eval_size", 128}}},
        {"writing", {{"train_size", 512}, {"eval_size", 128}}}}},
      {"schedule",
       {{"mode", "joint"},
        {"tasks", {"code", "math", "qa", "writing"}},
        {"weights", json::array()},
        {"steps", 1000},
        {"steps_per_stage", 250},
        {"stage_steps", json::array()},
        {"beta_by_mode", {{"joint", 0.02}, {"curriculum", 0.0}, {"reverse_curriculum", 0.0}}}}},
      {"judge",
       {{"mode", "oracle"}, {"endpoint", ""}, {"temperature", 0.4}, {"both_orders", false}, {"max_in_flight", 4},
        {"timeout_seconds", 30}}},
      {"rft", {{"samples_per_prompt", 16}, {"sft_steps", 0}, {"sft_batch", 8}, {"sft_learning_rate", 1e-2}}},
      {"merge", {{"density", 0.2}, {"lambda", 1.0}}},
      {"eval", {{"max_len", 16}, {"every", 0}}},
      {"checkpoint_every", 0},
  };
  if (name == "desk") return desk;
  if (name == "paper-table3") {
    // Scale-bound values as published; desk configs override them.
    json table3 = {
        {"preset", "paper-table3"},
        {"out", "runs/paper-table3"},
        {"train",
         {{"group_size", 16},
          {"clip_eps", 0.2},
          {"learning_rate", 1e-6},
          {"grad_clip", 1.0},
          {"batch_size", 1536},
          {"max_epochs", 3},
          {"temperature", 1.0},
          {"top_k", 50},
          {"max_len", 3072}}},
        {"judge", {{"temperature", 0.4}}},
        {"rft", {{"samples_per_prompt", 128}, {"sft_learning_rate", 2.5e-6}}},
        {"reference",
         {{"max_prompt_length", 1024},
          {"max_response_length", 3072},
          {"train_batch_size", "256x6"},
          {"sft_train_batch_size", 128},
          {"learning_scheduler", "constant"},
          {"sft_learning_scheduler", "cosine"},
          {"clip_ratio_low", 0.2},
          {"clip_ratio_high", 0.2},
          {"rollout_top_p", 1.0},
          {"judge_model", "gpt-4.1-mini"}}},
    };
    return merge_json(desk, table3);
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper-table3)");
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Reader r(j, "");
  r.get("preset", c.preset);
  r.get("seed", c.seed);
  r.get("out", c.out);
  if (const json* m = r.child("model")) parse_model(*m, c.model);
  if (const json* t = r.child("train")) parse_train(*t, c.train);
  c.train.seed = c.seed;
  if (const json* t = r.child("tasks")) {
    if (!t->is_object()) throw ConfigError("tasks must be an object");
    for (const auto& [k, v] : t->items()) {
      const TaskId id = parse_task(k, "tasks");
      taskgen::TaskSpec spec;
      bool seed_given = false;
      parse_task_spec(v, id, spec, seed_given);
      if (!seed_given) spec.seed = mix_seed(c.seed, static_cast<uint64_t>(id) + 1);
      c.tasks[id] = spec;
    }
  }
  if (const json* s = r.child("schedule")) parse_schedule(*s, c.schedule);
  if (const json* jj = r.child("judge")) parse_judge(*jj, c.judge);
  if (const json* rf = r.child("rft")) {
    Reader rr(*rf, "rft");
    rr.get("samples_per_prompt", c.rft.samples_per_prompt);
    rr.get("sft_steps", c.rft.sft_steps);
    rr.get("sft_batch", c.rft.sft_batch);
    rr.get("sft_learning_rate", c.rft.sft_learning_rate);
    rr.finish();
    if (c.rft.samples_per_prompt < 1 || c.rft.sft_steps < 0 || c.rft.sft_batch < 1 || !(c.rft.sft_learning_rate >= 0.0)) {
      throw ConfigError("rft settings out of range");
    }
  }
  if (const json* mg = r.child("merge")) {
    Reader mr(*mg, "merge");
    mr.get("density", c.merge.density);
    mr.get("lambda", c.merge.lambda);
    mr.finish();
    if (!(c.merge.density > 0.0 && c.merge.density <= 1.0)) throw ConfigError("merge.density must lie in (0, 1]");
  }
  if (const json* ev = r.child("eval")) {
    Reader er(*ev, "eval");
    er.get("max_len", c.eval.max_len);
    er.get("every", c.eval.every);
    er.finish();
    if (c.eval.max_len < 1 || c.eval.every < 0) throw ConfigError("eval settings out of range");
  }
  r.get("checkpoint_every", c.checkpoint_every);
  if (c.checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  r.child("reference");  // provenance record, not interpreted
  r.finish();

  if (c.schedule.tasks.empty()) throw ConfigError("schedule.tasks is empty");
  for (TaskId t : c.schedule.tasks) {
    if (!c.tasks.count(t)) throw ConfigError("schedule references task '" + std::string(task_name(t)) + "' without a spec");
  }
  try {
    make_distribution(c);
  } catch (const InputError& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["model"] = {{"vocab_size", c.model.policy.vocab_size}, {"embed_dim", c.model.policy.embed_dim},
                {"context", c.model.policy.context},       {"hidden", c.model.policy.hidden},
                {"init_scale", c.model.init_scale},        {"init_checkpoint", c.model.init_checkpoint},
                {"warm_start_steps", c.model.warm_start_steps}, {"warm_start_batch", c.model.warm_start_batch},
                {"warm_start_learning_rate", c.model.warm_start_learning_rate}};
  const TrainConfig& t = c.train;
  json beta = json::object();
  for (const auto& [k, v] : t.beta) beta[std::string(task_name(k))] = v;
  json weights = json::object();
  for (const auto& [k, w] : t.reward_weights) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    weights[std::string(task_name(k))] = {{"primary", opt(w.primary)}, {"format", opt(w.format)}, {"tags", opt(w.tags)}};
  }
  j["train"] = {{"group_size", t.group_size},
                {"clip_eps", t.clip_eps},
                {"beta", beta},
                {"sigma_floor", t.sigma_floor},
                {"learning_rate", t.learning_rate},
                {"weight_decay", t.weight_decay},
                {"adam_beta1", t.adamw.beta1},
                {"adam_beta2", t.adamw.beta2},
                {"adam_eps", t.adamw.eps},
                {"grad_clip", t.adamw.grad_clip},
                {"batch_size", t.batch_size},
                {"inner_epochs", t.inner_epochs},
                {"max_epochs", t.max_epochs},
                {"mixed_batches", t.mixed_batches},
                {"reset_optimizer_between_stages", t.reset_optimizer_between_stages},
                {"ref_policy", t.ref_policy == RefPolicy::kStageStart ? "stage_start" : "train_start"},
                {"temperature", t.decoding.temperature},
                {"top_k", t.decoding.top_k},
                {"max_len", t.decoding.max_len},
                {"reward_weights", weights}};
  j["tasks"] = json::object();
  for (const auto& [k, s] : c.tasks) j["tasks"][std::string(task_name(k))] = task_spec_to_json(s);
  json tasks = json::array();
  for (TaskId k : c.schedule.tasks) tasks.push_back(task_name(k));
  json bbm = json::object();
  for (const auto& [m, v] : c.schedule.beta_by_mode) bbm[std::string(schedule_mode_name(m))] = v;
  j["schedule"] = {{"mode", schedule_mode_name(c.schedule.mode)},
                   {"tasks", tasks},
                   {"weights", c.schedule.weights},
                   {"steps", c.schedule.steps},
                   {"steps_per_stage", c.schedule.steps_per_stage},
                   {"stage_steps", c.schedule.stage_steps},
                   {"beta_by_mode", bbm}};
  j["judge"] = {{"mode", c.judge.remote ? "remote" : "oracle"},
                {"endpoint", c.judge.remote_config.endpoint},
                {"temperature", c.judge.remote_config.temperature},
                {"both_orders", c.judge.remote_config.both_orders},
                {"max_in_flight", c.judge.remote_config.max_in_flight},
                {"timeout_seconds", c.judge.remote_config.timeout_seconds}};
  j["rft"] = {{"samples_per_prompt", c.rft.samples_per_prompt},
              {"sft_steps", c.rft.sft_steps},
              {"sft_batch", c.rft.sft_batch},
              {"sft_learning_rate", c.rft.sft_learning_rate}};
  j["merge"] = {{"density", c.merge.density}, {"lambda", c.merge.lambda}};
  j["eval"] = {{"max_len", c.eval.max_len}, {"every", c.eval.every}};
  j["checkpoint_every"] = c.checkpoint_every;
  return j;
}

RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides) {
  json file = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config root must be an object");
  }
  std::string preset = "desk";
  if (file.contains("preset")) {
    if (!file["preset"].is_string()) throw ConfigError("preset must be a string");
    preset = file["preset"].get<std::string>();
  }
  if (overrides.preset) preset = *overrides.preset;
  json merged = merge_json(preset_json(preset), file);
  merged["preset"] = preset;
  if (overrides.seed) merged["seed"] = *overrides.seed;
  if (overrides.out) merged["out"] = *overrides.out;
  return run_config_from_json(merged);
}

TaskDistribution make_distribution(const RunConfig& c) {
  const auto& s = c.schedule;
  switch (s.mode) {
    case ScheduleMode::kJoint:
      return joint_distribution(s.tasks, s.steps, s.weights);
    case ScheduleMode::kCurriculum:
      return curriculum_stages(s.tasks, s.steps_per_stage);
    case ScheduleMode::kReverseCurriculum:
      return reverse_curriculum(s.tasks, s.steps_per_stage);
    case ScheduleMode::kFixedOrder:
      return fixed_order(s.tasks, s.stage_steps);
  }
  throw ConfigError("unknown schedule mode");
}

TrainConfig effective_train_config(const RunConfig& c) {
  TrainConfig t = c.train;
  t.seed = c.seed;
  // Mode-level beta applies to multi-task runs only; single-task runs keep
  // their per-task value.
  const auto it = c.schedule.beta_by_mode.find(c.schedule.mode);
  if (it != c.schedule.beta_by_mode.end() && c.schedule.tasks.size() > 1) {
    for (TaskId k : kAllTasks) t.beta[k] = it->second;
  }
  return t;
}

std::unique_ptr<judge::Judge> make_judge(const RunConfig& c) {
  if (!c.judge.remote) return std::make_unique<judge::OracleJudge>();
  judge::RemoteJudgeConfig rc = c.judge.remote_config;
  if (const char* token = std::getenv("OMNIRL_JUDGE_TOKEN")) rc.token = token;
  return std::make_unique<judge::RemoteJudge>(rc);
}

}  // namespace omnirl
