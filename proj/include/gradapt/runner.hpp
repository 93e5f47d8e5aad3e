#pragma once

#include <string>

#include "gradapt/report.hpp"

// Orchestration entry points shared by the CLI and the test suites.

namespace gradapt {

// Stage one only: writes source_model.ckpt and stage1.json under out_dir.
void run_pretrain_source(const RunConfig& cfg, const std::string& out_dir);

// Generator training against a saved source model checkpoint.
void run_train_generator(const RunConfig& cfg, const std::string& model_path,
                         const std::string& out_dir);

// Stages two and three from saved checkpoints; writes the full artifact set.
FullRunResult run_adapt(const RunConfig& cfg, const std::string& model_path,
                        const std::string& generator_path, const std::string& out_dir);

// The whole pipeline in one process; writes checkpoints plus all artifacts.
FullRunResult run_all(const RunConfig& cfg, const std::string& out_dir);

// Metrics for a saved model on the config's target domain.
void run_evaluate(const RunConfig& cfg, const std::string& model_path,
                  const std::string& out_dir);

// Feature dumps for external plotting: what = target | source | generator.
void run_export_features(const RunConfig& cfg, const std::string& model_path,
                         const std::string& generator_path, const std::string& what,
                         const std::string& tag, const std::string& out_dir);

}  // namespace gradapt
