#include "omnirl/run.h"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "omnirl/checkpoint.h"
#include "omnirl/errors.h"
#include "omnirl/taskgen.h"
#include "omnirl/verifiers.h"

namespace omnirl {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr uint64_t kInitStream = 0x696e6974ULL;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::map<TaskId, std::vector<PromptInstance>> group_by_task(const std::vector<PromptInstance>& all) {
  std::map<TaskId, std::vector<PromptInstance>> out;
  for (const auto& inst : all) out[inst.task].push_back(inst);
  return out;
}

double mean_value(const PerformanceSnapshot& s) {
  if (s.values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [t, v] : s.values) sum += v;
  return sum / static_cast<double>(s.values.size());
}

std::string summary_markdown(const std::string& run_id, int64_t steps, const PerformanceSnapshot& eval) {
  std::ostringstream os;
  os << "# Run " << run_id << "\n\n";
  os << "Optimizer steps: " << steps << "\n\n";
  os << "| task | eval primary reward |\n|---|---|\n";
  for (const auto& [t, v] : eval.values) os << "| " << task_name(t) << " | " << std::fixed << std::setprecision(4) << v << " |\n";
  os << "| mean | " << std::fixed << std::setprecision(4) << mean_value(eval) << " |\n";
  return os.str();
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
  for (const char* k : keys) {
    if (!j.contains(k)) throw FormatError(what + " is missing '" + k + "'");
  }
}

}  // namespace

std::string run_id_for(const RunConfig& c) {
  json j = run_config_to_json(c);
  j.erase("out");
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

PreparedRun prepare_run(const RunConfig& c, bool warm_start, std::ostream* log) {
  std::map<TaskId, std::vector<PromptInstance>> train_sets, eval_sets;
  for (const auto& [t, spec] : c.tasks) {
    auto splits = taskgen::generate_splits(spec);
    train_sets[t] = std::move(splits.train);
    eval_sets[t] = std::move(splits.eval);
  }

  Vocabulary vocab = Vocabulary::standard();
  std::optional<PolicyParams> init;
  if (!c.model.init_checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(c.model.init_checkpoint);
    vocab = ck.vocab;
    init = ck.params;
  } else {
    if (c.model.policy.vocab_size != vocab.size()) {
      throw ConfigError("model.vocab_size must equal the standard vocabulary size (" + std::to_string(vocab.size()) + ")");
    }
    init = PolicyParams::random(c.model.policy, mix_seed(c.seed, kInitStream), c.model.init_scale);
  }
  if (warm_start && c.model.warm_start_steps > 0 && c.model.init_checkpoint.empty()) {
    std::vector<PromptInstance> prompts;
    for (const auto& [t, v] : train_sets) prompts.insert(prompts.end(), v.begin(), v.end());
    FormatWarmStart ws;
    ws.steps = c.model.warm_start_steps;
    ws.batch = c.model.warm_start_batch;
    ws.learning_rate = c.model.warm_start_learning_rate;
    ws.seed = c.seed;
    init = format_warm_start(*init, vocab, prompts, ws);
    if (log) *log << "format warm start: " << ws.steps << " steps\n";
  }
  return PreparedRun{std::move(vocab), std::move(*init), std::move(train_sets), std::move(eval_sets)};
}

TrainOutcome cmd_train(const RunConfig& c, bool dry_run, std::ostream& log) {
  TrainOutcome outcome;
  outcome.dir = c.out;
  outcome.run_id = run_id_for(c);
  const TaskDistribution schedule = make_distribution(c);
  const TrainConfig train_config = effective_train_config(c);
  PreparedRun prep = prepare_run(c, !dry_run, &log);
  const Vocabulary& vocab = prep.vocab;
  const auto& train_sets = prep.train_sets;
  const auto& eval_sets = prep.eval_sets;
  if (dry_run) {
    log << "config ok: run " << outcome.run_id << ", " << schedule.total_steps() << " steps over "
        << schedule.tasks.size() << " task(s)\n";
    return outcome;
  }

  const fs::path dir = c.out;
  make_dirs(dir);
  write_text(dir / "config.json", run_config_to_json(c).dump(2) + "\n");
  write_text(dir / "run_id", outcome.run_id + "\n");
  auto metrics = open_out(dir / "metrics.jsonl");
  json header = {{"schema", kMetricsSchema},
                 {"run_id", outcome.run_id},
                 {"seed", c.seed},
                 {"schedule", distribution_to_json(schedule)}};
  metrics << header.dump() << "\n";

  auto judge = make_judge(c);
  std::optional<std::ofstream> eval_log;
  if (c.eval.every > 0) eval_log.emplace(open_out(dir / "eval.jsonl"));
  if (c.checkpoint_every > 0) make_dirs(dir / "checkpoints");
  // Staged runs also record every task at each stage end for sequential BWT.
  std::optional<std::ofstream> stage_log;
  std::vector<PerformanceSnapshot> stage_snaps;
  if (schedule.staged()) stage_log.emplace(open_out(dir / "stage_eval.jsonl"));

  TrainHooks hooks;
  hooks.on_stage = [&](int stage, TaskId task) { log << "stage " << stage << ": " << task_name(task) << "\n"; };
  hooks.on_step = [&](const StepMetrics& m, const PolicyParams& params) {
    metrics << metrics_to_json(m).dump() << "\n";
    const int64_t done = m.step + 1;
    if (eval_log && done % c.eval.every == 0) {
      const auto snap = evaluate_tasks(params, vocab, eval_sets, *judge, c.eval.max_len);
      *eval_log << json{{"step", done}, {"values", snapshot_to_json(snap)["values"]}}.dump() << "\n";
      log << "step " << done << " eval mean " << mean_value(snap) << "\n";
    }
    if (stage_log && done == schedule.stage_ends[static_cast<size_t>(m.stage)]) {
      stage_snaps.push_back(evaluate_tasks(params, vocab, eval_sets, *judge, c.eval.max_len));
      *stage_log << json{{"stage", m.stage}, {"task", m.task}, {"step", done},
                         {"values", snapshot_to_json(stage_snaps.back())["values"]}}.dump()
                 << "\n";
    }
    if (c.checkpoint_every > 0 && done % c.checkpoint_every == 0) {
      save_checkpoint(dir / "checkpoints" / ("step_" + std::to_string(done) + ".bin"), vocab, params);
    }
  };
  const TrainResult result = train(prep.init, vocab, train_sets, schedule, train_config, *judge, hooks);
  if (!metrics) throw IoError("failed writing metrics log");
  save_checkpoint(dir / "checkpoint.bin", vocab, result.params);

  outcome.final_eval = evaluate_tasks(result.params, vocab, eval_sets, *judge, c.eval.max_len, outcome.run_id);
  json summary = {{"run_id", outcome.run_id},
                  {"steps", static_cast<int64_t>(result.metrics.size())},
                  {"final_eval", snapshot_to_json(outcome.final_eval)},
                  {"mean_final_eval", mean_value(outcome.final_eval)}};
  if (stage_log && stage_snaps.size() == schedule.tasks.size()) {
    json seq = json::object();
    for (const auto& [t, v] : sequential_bwt(schedule.tasks, stage_snaps)) seq[std::string(task_name(t))] = v;
    summary["sequential_bwt"] = seq;
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_text(dir / "summary.md", summary_markdown(outcome.run_id, static_cast<int64_t>(result.metrics.size()), outcome.final_eval));
  {
    auto csv = open_out(dir / "final_eval.csv");
    write_snapshot_csv(csv, outcome.final_eval);
  }
  return outcome;
}

PerformanceSnapshot cmd_eval(const fs::path& checkpoint, const fs::path& dataset, judge::Judge& judge, int max_len,
                             EvalResponder responder) {
  const auto splits = group_by_task(load_dataset(dataset));
  if (splits.empty()) throw InputError("dataset " + dataset.string() + " is empty");
  if (responder == EvalResponder::kReference) {
    return evaluate_tasks([](const PromptInstance& inst) { return taskgen::reference_output(inst); }, splits, judge,
                          "reference");
  }
  const Checkpoint ck = load_checkpoint(checkpoint);
  return evaluate_tasks(ck.params, ck.vocab, splits, judge, max_len, checkpoint.filename().string());
}

BwtReport cmd_bwt(const fs::path& base, const std::map<TaskId, fs::path>& runs, const fs::path& out_dir) {
  const PerformanceSnapshot base_snap = load_snapshot(base.string());
  std::map<TaskId, PerformanceSnapshot> after;
  for (const auto& [t, p] : runs) after[t] = load_snapshot(p.string());
  BwtReport r;
  r.matrix = build_matrix(base_snap, after);
  r.ordering = order_by_bwt(r.matrix.averages());
  if (!out_dir.empty()) {
    make_dirs(out_dir);
    {
      auto csv = open_out(out_dir / "matrix.csv");
      write_matrix_csv(csv, r.matrix);
    }
    write_text(out_dir / "matrix.json", matrix_to_json(r.matrix).dump(2) + "\n");
    write_text(out_dir / "ordering.json", bwt_report_to_json(r)["ordering"].dump() + "\n");
  }
  return r;
}

json bwt_report_to_json(const BwtReport& r) {
  json j = matrix_to_json(r.matrix);
  j["ordering"] = json::array();
  for (TaskId t : r.ordering) j["ordering"].push_back(task_name(t));
  return j;
}

void cmd_merge(const fs::path& base, const std::vector<fs::path>& models, double density, double lambda,
               const fs::path& out) {
  const Checkpoint base_ck = load_checkpoint(base);
  std::vector<PolicyParams> params;
  for (const auto& m : models) {
    Checkpoint ck = load_checkpoint(m);
    if (ck.vocab.tokens() != base_ck.vocab.tokens()) throw InputError("checkpoint vocabularies differ: " + m.string());
    params.push_back(std::move(ck.params));
  }
  save_checkpoint(out, base_ck.vocab, ties_merge(base_ck.params, params, density, lambda));
}

RftOutcome cmd_rft(const fs::path& checkpoint, const fs::path& dataset, const RunConfig& c, const fs::path& out,
                   std::optional<double> stub_reward, const fs::path& sft_checkpoint, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  std::vector<PromptInstance> instances;
  for (auto& inst : load_dataset(dataset)) {
    if (inst.split == Split::kTrain) instances.push_back(std::move(inst));
  }
  RftConfig rc;
  rc.samples_per_prompt = c.rft.samples_per_prompt;
  rc.decoding = c.train.decoding;
  rc.seed = c.seed;
  RftOutcome outcome;
  if (stub_reward) {
    const double v = *stub_reward;
    outcome.data = rejection_sample(ck.params, ck.vocab, instances, rc,
                                    [v](const PromptInstance&, const std::string&) { return std::optional<double>(v); });
  } else {
    auto judge = make_judge(c);
    outcome.data = rejection_sample(ck.params, ck.vocab, instances, rc, *judge);
  }
  {
    auto f = open_out(out);
    write_rft_dataset(f, outcome.data);
  }
  log << "rft: kept " << outcome.data.examples.size() << ", dropped " << outcome.data.dropped << "\n";
  if (outcome.data.examples.empty()) {
    log << "warning: no completion reached the maximal reward; the dataset is empty\n";
    return outcome;
  }
  if (c.rft.sft_steps > 0 && !sft_checkpoint.empty()) {
    std::vector<SftExample> all;
    for (const auto& ex : outcome.data.examples) all.push_back(sft_example(ck.vocab, ex));
    PolicyParams params = ck.params;
    OptimizerState state(params.size(), c.train.weight_decay);
    const size_t bs = static_cast<size_t>(c.rft.sft_batch);
    double loss = 0.0;
    for (int s = 0; s < c.rft.sft_steps; ++s) {
      std::vector<SftExample> batch;
      for (size_t k = 0; k < bs && k < all.size(); ++k) batch.push_back(all[(static_cast<size_t>(s) * bs + k) % all.size()]);
      loss = sft_step(params, batch, c.rft.sft_learning_rate, state, c.train.adamw);
    }
    outcome.final_sft_loss = loss;
    save_checkpoint(sft_checkpoint, ck.vocab, params);
    log << "sft: " << c.rft.sft_steps << " steps, last batch NLL " << loss << "\n";
  }
  return outcome;
}

void cmd_gen(const RunConfig& c, const fs::path& out_dir) {
  make_dirs(out_dir);
  for (const auto& [t, spec] : c.tasks) {
    const auto splits = taskgen::generate_splits(spec);
    const std::string name(task_name(t));
    save_dataset(out_dir / (name + ".train.jsonl"), splits.train);
    save_dataset(out_dir / (name + ".eval.jsonl"), splits.eval);
  }
}

std::string cmd_validate(const std::string& kind, const fs::path& path) {
  if (kind == "config") {
    const RunConfig c = load_run_config(path.string());
    return "config ok (run " + run_id_for(c) + ")";
  }
  if (kind == "dataset") {
    return "dataset ok (" + std::to_string(load_dataset(path).size()) + " instances)";
  }
  if (kind == "checkpoint") {
    const Checkpoint ck = load_checkpoint(path);
    if (!ck.params.all_finite()) throw FormatError("checkpoint contains non-finite parameters");
    return "checkpoint ok (" + std::to_string(ck.params.size()) + " parameters)";
  }
  if (kind == "snapshot") {
    return "snapshot ok (" + std::to_string(load_snapshot(path.string()).values.size()) + " tasks)";
  }
  if (kind == "metrics") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw FormatError("metrics line " + std::to_string(n + 1) + ": " + e.what());
      }
      if (n == 0) {
        require_keys(j, {"schema", "run_id", "seed", "schedule"}, "metrics header");
        if (j["schema"] != kMetricsSchema) throw FormatError("metrics header has the wrong schema");
      } else {
        require_keys(j, {"step", "task", "mean_reward", "loss", "mean_kl", "clip_fraction", "skipped_groups"},
                     "metrics line " + std::to_string(n + 1));
        if (j["step"].get<int64_t>() != n - 1) throw FormatError("metrics steps are not consecutive");
      }
      ++n;
    }
    if (n == 0) throw FormatError("metrics log is empty");
    return "metrics ok (" + std::to_string(n - 1) + " steps)";
  }
  throw InputError("unknown file kind '" + kind + "' (config, dataset, checkpoint, metrics, snapshot)");
}

}  // namespace omnirl
