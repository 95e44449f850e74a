// omnirl: train, evaluate and analyse multi-task policies from the shell.
//
// Exit codes: 0 ok, 2 config or usage error, 3 IO or format error,
// 4 numeric error, 5 remote-judge error. Failures also print one JSON error
// record to stderr.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omnirl/errors.h"
#include "omnirl/run.h"

namespace {

using omnirl::ConfigOverrides;

int exit_code_for(const omnirl::Error& e) {
  if (dynamic_cast<const omnirl::ConfigError*>(&e) || dynamic_cast<const omnirl::InputError*>(&e)) return 2;
  if (dynamic_cast<const omnirl::IoError*>(&e)) return 3;
  if (dynamic_cast<const omnirl::NumericError*>(&e)) return 4;
  if (dynamic_cast<const omnirl::JudgeError*>(&e)) return 5;
  return 1;
}

void print_error(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

struct CommonFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string preset;

  ConfigOverrides overrides() const {
    ConfigOverrides o;
    if (!preset.empty()) o.preset = preset;
    o.seed = seed;
    if (!out.empty()) o.out = out;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "Run config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "Override the config seed");
  cmd->add_option("--out", f.out, "Output directory or file");
  cmd->add_option("--preset", f.preset, "desk | paper-table3")->check(CLI::IsMember({"desk", "paper-table3"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task GRPO training for a tiny token policy"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  bool dry_run = false;
  auto* train = app.add_subcommand("train", "Train with MT-GRPO under the configured schedule");
  add_common(train, train_flags, true);
  train->add_flag("--dry-run", dry_run, "Validate the config without writing anything");

  CommonFlags eval_flags;
  std::string eval_ckpt, eval_data, responder = "policy";
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint on a dataset");
  add_common(eval, eval_flags, false);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file");
  eval->add_option("--dataset", eval_data, "Dataset (JSONL)")->required();
  eval->add_option("--responder", responder, "policy | reference (scripted solver)")
      ->check(CLI::IsMember({"policy", "reference"}));

  std::string bwt_base, bwt_out;
  std::vector<std::string> bwt_runs;
  auto* bwt = app.add_subcommand("bwt", "Backward-transfer matrix and curriculum ordering");
  bwt->add_option("--base", bwt_base, "Base snapshot (JSON or CSV)")->required();
  bwt->add_option("--run", bwt_runs, "task=snapshot for each single-task run")->required();
  bwt->add_option("--out", bwt_out, "Directory for matrix.csv, matrix.json, ordering.json");

  CommonFlags merge_flags;
  std::string merge_base;
  std::vector<std::string> merge_models;
  std::optional<double> density, lambda;
  auto* merge = app.add_subcommand("merge", "TIES-merge checkpoints relative to a base");
  add_common(merge, merge_flags, false);
  merge->add_option("--base", merge_base, "Base checkpoint")->required();
  merge->add_option("--model", merge_models, "Task checkpoint (repeatable)")->required();
  merge->add_option("--density", density, "Fraction of each delta kept");
  merge->add_option("--lambda", lambda, "Scale of the merged delta");

  CommonFlags rft_flags;
  std::string rft_ckpt, rft_data, sft_out;
  std::optional<double> stub_reward;
  auto* rft = app.add_subcommand("rft", "Rejection sampling, optionally followed by SFT");
  add_common(rft, rft_flags, false);
  rft->add_option("--checkpoint", rft_ckpt, "Sampling checkpoint")->required();
  rft->add_option("--dataset", rft_data, "Prompts (JSONL, train split used)")->required();
  rft->add_option("--sft-out", sft_out, "Write the fine-tuned checkpoint here");
  rft->add_option("--stub-reward", stub_reward, "Constant primary reward instead of the verifiers (testing)");

  std::string validate_kind, validate_path;
  auto* validate = app.add_subcommand("validate", "Check a file against its schema");
  validate->add_option("kind", validate_kind, "config | dataset | checkpoint | metrics | snapshot")->required();
  validate->add_option("path", validate_path, "File to check")->required();

  CommonFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "Write the configured train/eval datasets");
  add_common(gen, gen_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*train) {
      const auto cfg = omnirl::load_run_config(train_flags.config, train_flags.overrides());
      const auto outcome = omnirl::cmd_train(cfg, dry_run, std::cerr);
      if (dry_run) {
        std::cout << omnirl::run_config_to_json(cfg).dump(2) << "\n";
      } else {
        std::cout << nlohmann::json{{"run_id", outcome.run_id},
                                    {"dir", outcome.dir.string()},
                                    {"final_eval", omnirl::snapshot_to_json(outcome.final_eval)}}
                         .dump()
                  << "\n";
      }
    } else if (*eval) {
      const auto cfg = omnirl::load_run_config(eval_flags.config, eval_flags.overrides());
      const bool reference = responder == "reference";
      if (!reference && eval_ckpt.empty()) throw omnirl::ConfigError("eval needs --checkpoint");
      auto judge = omnirl::make_judge(cfg);
      const auto snap = omnirl::cmd_eval(eval_ckpt, eval_data, *judge, cfg.eval.max_len,
                                         reference ? omnirl::EvalResponder::kReference : omnirl::EvalResponder::kPolicy);
      const std::string text = omnirl::snapshot_to_json(snap).dump();
      std::cout << text << "\n";
      if (!eval_flags.out.empty()) {
        std::ofstream f(eval_flags.out);
        if (!(f << text << "\n")) throw omnirl::IoError("cannot write " + eval_flags.out);
      }
    } else if (*bwt) {
      std::map<omnirl::TaskId, std::filesystem::path> runs;
      for (const auto& r : bwt_runs) {
        const auto eq = r.find('=');
        if (eq == std::string::npos) throw omnirl::InputError("--run expects task=path, got " + r);
        const auto task = omnirl::task_from_name(r.substr(0, eq));
        if (!runs.emplace(task, r.substr(eq + 1)).second) throw omnirl::InputError("duplicate --run for " + r.substr(0, eq));
      }
      const auto report = omnirl::cmd_bwt(bwt_base, runs, bwt_out);
      std::cout << omnirl::bwt_report_to_json(report).dump() << "\n";
    } else if (*merge) {
      const auto cfg = omnirl::load_run_config(merge_flags.config, merge_flags.overrides());
      if (merge_flags.out.empty()) throw omnirl::ConfigError("merge needs --out");
      std::vector<std::filesystem::path> models(merge_models.begin(), merge_models.end());
      omnirl::cmd_merge(merge_base, models, density.value_or(cfg.merge.density), lambda.value_or(cfg.merge.lambda),
                        merge_flags.out);
      std::cout << nlohmann::json{{"merged", merge_flags.out}, {"models", merge_models.size()}}.dump() << "\n";
    } else if (*rft) {
      const auto cfg = omnirl::load_run_config(rft_flags.config, rft_flags.overrides());
      if (rft_flags.out.empty()) throw omnirl::ConfigError("rft needs --out");
      const auto outcome = omnirl::cmd_rft(rft_ckpt, rft_data, cfg, rft_flags.out, stub_reward, sft_out, std::cerr);
      nlohmann::json j{{"dataset", rft_flags.out},
                       {"kept", outcome.data.examples.size()},
                       {"dropped", outcome.data.dropped}};
      if (outcome.final_sft_loss) j["final_sft_loss"] = *outcome.final_sft_loss;
      std::cout << j.dump() << "\n";
    } else if (*validate) {
      std::cout << omnirl::cmd_validate(validate_kind, validate_path) << "\n";
    } else if (*gen) {
      const auto cfg = omnirl::load_run_config(gen_flags.config, gen_flags.overrides());
      const std::string out = gen_flags.out.empty() ? cfg.out : gen_flags.out;
      omnirl::cmd_gen(cfg, out);
      std::cout << nlohmann::json{{"dir", out}, {"tasks", cfg.tasks.size()}}.dump() << "\n";
    }
  } catch (const omnirl::Error& e) {
    print_error(e.kind(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
