#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gradapt/adapt.hpp"
#include "gradapt/config.hpp"

// Run artifacts: report.json (fully deterministic, no timestamps),
// metrics.csv, selection.jsonl, pseudo_events.jsonl, per-class ROC tables.

namespace gradapt {

struct FullRunResult {
  RunConfig config;
  Evaluation source_only;  // source model on the target before adaptation
  std::vector<double> stage1_loss_trace;
  std::vector<double> stage1_ce_trace;
  double stage1_train_accuracy = 0.0;
  AdaptResult adapt;
  RocAucResult roc;
};

nlohmann::json build_report(const FullRunResult& run);

void write_report(const FullRunResult& run, const std::string& out_dir);

// Side-by-side metric table over runs sharing one data-generating process.
// Groups by report label, aggregates mean and standard deviation per metric.
// Throws when class counts or dataset hashes differ.
struct ComparisonRow {
  std::string label;
  std::size_t runs = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  double auc_mean = 0.0, auc_std = 0.0;
  double kappa_mean = 0.0, kappa_std = 0.0;
  double qwk_mean = 0.0, qwk_std = 0.0;
};

std::vector<ComparisonRow> compare_reports(const std::vector<std::string>& report_paths);
std::string comparison_text(const std::vector<ComparisonRow>& rows);
void write_comparison(const std::vector<ComparisonRow>& rows, const std::string& csv_path,
                      const std::string& text_path);

}  // namespace gradapt
