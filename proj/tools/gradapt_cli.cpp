// Experiment harness: configuration in, artifacts out. Subcommands run the
// pipeline stages individually or end to end, evaluate checkpoints, export
// features and compare finished reports. Flags override config file values,
// which override built-in defaults.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradapt/config.hpp"
#include "gradapt/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "runs/out";
  std::int64_t seed = -1;
  double budget = -1.0;
  int rounds = -1;
  std::vector<std::string> ablate;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config JSON path");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Root seed (overrides config)");
  cmd->add_option("--budget", args.budget, "Active budget fraction (overrides config)");
  cmd->add_option("--rounds", args.rounds, "Labeling rounds (overrides config)");
  cmd->add_option("--ablate", args.ablate, "KEY=BOOL ablation switch (repeatable)")
      ->take_all();
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw CLI::ValidationError("--ablate", "value must be a boolean, got '" + v + "'");
}

gradapt::RunConfig resolve_config(const CommonArgs& args) {
  gradapt::RunConfig cfg =
      args.config_path.empty() ? gradapt::default_config() : gradapt::load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.budget > 0.0) cfg.budget_fraction = args.budget;
  if (args.rounds > 0) {
    cfg.rounds = args.rounds;
    cfg.adapt.active_round_epochs.clear();
  }
  for (const auto& kv : args.ablate) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--ablate", "expected KEY=BOOL, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const bool value = parse_bool(kv.substr(eq + 1));
    auto& ab = cfg.adapt.ablation;
    if (key == "proto_align") {
      ab.proto_align = value;
    } else if (key == "inter_consistency") {
      ab.inter_consistency = value;
    } else if (key == "intra_consistency") {
      ab.intra_consistency = value;
    } else if (key == "mixup") {
      ab.mixup = value;
    } else if (key == "pseudo_labels") {
      ab.pseudo_labels = value;
    } else if (key == "pseudo_add") {
      ab.pseudo_add = value;
    } else if (key == "pseudo_mix_check") {
      ab.pseudo_mix_check = value;
    } else if (key == "pseudo_revoke") {
      ab.pseudo_revoke = value;
    } else if (key == "matching_selection") {
      cfg.adapt.matching_selection = value;
    } else if (key == "source_contrastive") {
      cfg.stage1.contrastive_weight = value ? cfg.stage1.contrastive_weight : 0.0;
    } else {
      throw CLI::ValidationError("--ablate", "unknown switch '" + key + "'");
    }
  }
  gradapt::finalize(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-free active adaptation pipeline for ordinal graders"};
  app.require_subcommand(1);

  CommonArgs pretrain_args;
  auto* pretrain = app.add_subcommand("pretrain-source", "Train the source model");
  add_common(pretrain, pretrain_args);

  CommonArgs gen_args;
  std::string gen_model = "";
  auto* gen = app.add_subcommand("train-generator", "Train the feature generator");
  add_common(gen, gen_args);
  gen->add_option("--model", gen_model, "Source model checkpoint");

  CommonArgs adapt_args;
  std::string adapt_model;
  std::string adapt_generator;
  auto* adapt_cmd = app.add_subcommand("adapt", "Run labeling rounds and adaptation");
  add_common(adapt_cmd, adapt_args);
  adapt_cmd->add_option("--model", adapt_model, "Source model checkpoint")->required();
  adapt_cmd->add_option("--generator", adapt_generator, "Generator checkpoint")->required();

  CommonArgs eval_args;
  std::string eval_model;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on the target");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", eval_model, "Model checkpoint")->required();

  CommonArgs all_args;
  auto* all_cmd = app.add_subcommand("run-all", "Full pipeline end to end");
  add_common(all_cmd, all_args);

  CommonArgs export_args;
  std::string export_model;
  std::string export_generator;
  std::string export_what = "target";
  std::string export_tag = "target";
  auto* export_cmd = app.add_subcommand("export-features", "Dump features for plotting");
  add_common(export_cmd, export_args);
  export_cmd->add_option("--checkpoint", export_model, "Model checkpoint");
  export_cmd->add_option("--generator", export_generator, "Generator checkpoint");
  export_cmd->add_option("--what", export_what, "target | source | generator");
  export_cmd->add_option("--tag", export_tag, "Tag used in the output filename");

  std::vector<std::string> compare_inputs;
  std::string compare_out = "comparison";
  auto* compare_cmd = app.add_subcommand("compare", "Tabulate metrics across reports");
  compare_cmd->add_option("reports", compare_inputs, "report.json paths")->required();
  compare_cmd->add_option("--out", compare_out, "Output prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pretrain->parsed()) {
      gradapt::run_pretrain_source(resolve_config(pretrain_args), pretrain_args.out_dir);
    } else if (gen->parsed()) {
      const auto cfg = resolve_config(gen_args);
      const std::string model =
          gen_model.empty() ? gen_args.out_dir + "/source_model.ckpt" : gen_model;
      gradapt::run_train_generator(cfg, model, gen_args.out_dir);
    } else if (adapt_cmd->parsed()) {
      const auto run = gradapt::run_adapt(resolve_config(adapt_args), adapt_model,
                                          adapt_generator, adapt_args.out_dir);
      std::printf("final accuracy %.4f qwk %.4f\n",
                  run.adapt.epoch_metrics.back().accuracy, run.adapt.epoch_metrics.back().qwk);
    } else if (eval_cmd->parsed()) {
      gradapt::run_evaluate(resolve_config(eval_args), eval_model, eval_args.out_dir);
    } else if (all_cmd->parsed()) {
      const auto run = gradapt::run_all(resolve_config(all_args), all_args.out_dir);
      std::printf("source-only accuracy %.4f -> adapted %.4f (qwk %.4f)\n",
                  run.source_only.accuracy, run.adapt.epoch_metrics.back().accuracy,
                  run.adapt.epoch_metrics.back().qwk);
    } else if (export_cmd->parsed()) {
      gradapt::run_export_features(resolve_config(export_args), export_model, export_generator,
                                   export_what, export_tag, export_args.out_dir);
    } else if (compare_cmd->parsed()) {
      const auto rows = gradapt::compare_reports(compare_inputs);
      gradapt::write_comparison(rows, compare_out + ".csv", compare_out + ".txt");
      std::printf("%s", gradapt::comparison_text(rows).c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
