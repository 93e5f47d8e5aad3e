#include "gradapt/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gradapt/numio.hpp"

namespace gradapt {

namespace {

using nlohmann::json;

json metrics_json(const EpochMetrics& em) {
  return {{"epoch", em.epoch},
          {"loss_total", em.loss_total},
          {"loss_ce", em.loss_ce},
          {"loss_proto", em.loss_proto},
          {"loss_inter", em.loss_inter},
          {"loss_intra", em.loss_intra},
          {"loss_mix", em.loss_mix},
          {"accuracy", em.accuracy},
          {"macro_f1", em.macro_f1},
          {"kappa", em.kappa},
          {"qwk", em.qwk},
          {"pool_size", em.pool_size},
          {"pseudo_count", em.pseudo_count}};
}

}  // namespace

json build_report(const FullRunResult& run) {
  const auto& cfg = run.config;
  json j;
  j["schema_version"] = 1;
  j["label"] = cfg.label;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  j["dataset_hash"] = dataset_hash(cfg);
  j["config"] = config_to_json(cfg);
  j["classes"] = cfg.source_spec.classes;

  j["stage1"] = {{"loss_trace", run.stage1_loss_trace},
                 {"ce_trace", run.stage1_ce_trace},
                 {"train_accuracy", run.stage1_train_accuracy}};

  j["source_only"] = {{"accuracy", run.source_only.accuracy},
                      {"macro_f1", run.source_only.macro_f1},
                      {"kappa", run.source_only.kappa},
                      {"qwk", run.source_only.qwk}};

  json rounds = json::array();
  for (const auto& r : run.adapt.selection_rounds) {
    json rec = {{"round", r.round}, {"selected", r.selected}};
    if (std::isnan(r.mmd_before)) {
      rec["mmd_before"] = nullptr;
    } else {
      rec["mmd_before"] = r.mmd_before;
    }
    rec["mmd_after"] = r.mmd_after;
    rounds.push_back(rec);
  }
  j["selection_rounds"] = rounds;

  json epochs = json::array();
  for (const auto& em : run.adapt.epoch_metrics) epochs.push_back(metrics_json(em));
  j["epochs"] = epochs;

  // final evaluation
  const auto& cmx = run.adapt.final_confusion;
  json cm_rows = json::array();
  for (std::size_t r = 0; r < cmx.classes; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < cmx.classes; ++c) row.push_back(cmx.at(r, c));
    cm_rows.push_back(row);
  }
  const auto s = summary(cmx);
  json final;
  final["confusion"] = cm_rows;
  final["accuracy"] = s.accuracy;
  final["per_class_recall"] = s.recall;
  final["per_class_f1"] = s.f1;
  final["macro_f1"] = s.macro_f1;
  final["kappa"] = kappa(cmx, KappaWeighting::None).value;
  final["qwk"] = kappa(cmx, KappaWeighting::Quadratic).value;
  final["auc"] = run.roc.auc;
  final["auc_defined"] = run.roc.defined;
  final["macro_auc"] = run.roc.macro_auc;
  j["final"] = final;

  // pseudo-label summary
  std::size_t adds = 0;
  std::size_t revokes = 0;
  std::size_t add_correct = 0;
  for (const auto& e : run.adapt.pseudo_events) {
    if (e.kind == "add") {
      ++adds;
      add_correct += e.label == e.true_label ? 1 : 0;
    }
    if (e.kind == "revoke") ++revokes;
  }
  j["pseudo"] = {{"adds", adds},
                 {"revokes", revokes},
                 {"add_precision", adds > 0 ? static_cast<double>(add_correct) /
                                                  static_cast<double>(adds)
                                            : 0.0},
                 {"final_pseudo_count",
                  run.adapt.epoch_metrics.empty() ? 0
                                                  : run.adapt.epoch_metrics.back().pseudo_count}};

  j["oracle"] = {{"distinct_calls", run.adapt.oracle_distinct},
                 {"total_calls", run.adapt.oracle_calls},
                 {"budget", cfg.adapt.budget_total}};
  return j;
}

void write_report(const FullRunResult& run, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto& cfg = run.config;
  const std::string chash = config_hash(cfg);

  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw std::runtime_error("write_report: cannot write report.json");
    out << build_report(run).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "metrics.csv");
    out << "# config=" << chash << " seed=" << cfg.seed << "\n";
    out << "epoch,loss_total,loss_ce,loss_proto,loss_inter,loss_intra,loss_mix,"
           "accuracy,macro_f1,kappa,qwk,pool_size,pseudo_count\n";
    for (const auto& em : run.adapt.epoch_metrics) {
      out << em.epoch << "," << format_double(em.loss_total) << "," << format_double(em.loss_ce)
          << "," << format_double(em.loss_proto) << "," << format_double(em.loss_inter) << ","
          << format_double(em.loss_intra) << "," << format_double(em.loss_mix) << ","
          << format_double(em.accuracy) << "," << format_double(em.macro_f1) << ","
          << format_double(em.kappa) << "," << format_double(em.qwk) << "," << em.pool_size
          << "," << em.pseudo_count << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "selection.jsonl");
    for (const auto& r : run.adapt.selection_rounds) {
      json rec;
      rec["config"] = chash;
      rec["seed"] = cfg.seed;
      rec["round"] = r.round;
      rec["selected"] = r.selected;
      if (std::isnan(r.mmd_before)) {
        rec["mmd_before"] = nullptr;
      } else {
        rec["mmd_before"] = r.mmd_before;
      }
      rec["mmd_after"] = r.mmd_after;
      rec["wall_ms"] = r.wall_ms;
      out << rec.dump() << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "pseudo_events.jsonl");
    for (const auto& e : run.adapt.pseudo_events) {
      json rec;
      rec["config"] = chash;
      rec["seed"] = cfg.seed;
      rec["epoch"] = e.epoch;
      rec["kind"] = e.kind;
      rec["id"] = e.id;
      rec["label"] = e.label;
      rec["confidence"] = e.confidence;
      rec["mix_confidence"] = e.mix_confidence;
      rec["mix_lambda"] = e.mix_lambda;
      rec["true_label"] = e.true_label;
      out << rec.dump() << "\n";
    }
  }
  for (std::size_t c = 0; c < run.roc.curves.size(); ++c) {
    std::ofstream out(fs::path(out_dir) / ("roc_" + std::to_string(c) + ".csv"));
    out << "# config=" << chash << " seed=" << cfg.seed << " class=" << c
        << " defined=" << (run.roc.defined[c] ? 1 : 0) << "\n";
    out << "fpr,tpr,threshold\n";
    for (const auto& pt : run.roc.curves[c]) {
      out << format_double(pt.fpr) << "," << format_double(pt.tpr) << ","
          << format_double(pt.threshold) << "\n";
    }
  }
}

std::vector<ComparisonRow> compare_reports(const std::vector<std::string>& report_paths) {
  if (report_paths.empty()) throw std::invalid_argument("compare: no reports given");
  struct Acc {
    std::vector<double> acc, f1, auc, kap, qwk;
  };
  std::map<std::string, Acc> groups;
  std::string expect_dataset;
  std::size_t expect_classes = 0;
  for (const auto& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("compare: cannot read " + path);
    json j;
    in >> j;
    const auto dataset = j.at("dataset_hash").get<std::string>();
    const auto classes = j.at("classes").get<std::size_t>();
    if (expect_dataset.empty()) {
      expect_dataset = dataset;
      expect_classes = classes;
    } else if (dataset != expect_dataset || classes != expect_classes) {
      throw std::invalid_argument("compare: reports disagree on dataset hash or classes");
    }
    auto& g = groups[j.at("label").get<std::string>()];
    const auto& f = j.at("final");
    g.acc.push_back(f.at("accuracy").get<double>());
    g.f1.push_back(f.at("macro_f1").get<double>());
    g.auc.push_back(f.at("macro_auc").get<double>());
    g.kap.push_back(f.at("kappa").get<double>());
    g.qwk.push_back(f.at("qwk").get<double>());
  }

  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return std::make_pair(m, s);
  };

  std::vector<ComparisonRow> rows;
  for (const auto& [label, g] : groups) {
    ComparisonRow row;
    row.label = label;
    row.runs = g.acc.size();
    std::tie(row.acc_mean, row.acc_std) = mean_std(g.acc);
    std::tie(row.f1_mean, row.f1_std) = mean_std(g.f1);
    std::tie(row.auc_mean, row.auc_std) = mean_std(g.auc);
    std::tie(row.kappa_mean, row.kappa_std) = mean_std(g.kap);
    std::tie(row.qwk_mean, row.qwk_std) = mean_std(g.qwk);
    rows.push_back(row);
  }
  return rows;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "label                         runs  acc            f1             auc            "
         "kappa          qwk\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-28s %4zu  %.4f+-%.4f %.4f+-%.4f %.4f+-%.4f %.4f+-%.4f %.4f+-%.4f\n",
                  r.label.c_str(), r.runs, r.acc_mean, r.acc_std, r.f1_mean, r.f1_std, r.auc_mean,
                  r.auc_std, r.kappa_mean, r.kappa_std, r.qwk_mean, r.qwk_std);
    out << line;
  }
  return out.str();
}

void write_comparison(const std::vector<ComparisonRow>& rows, const std::string& csv_path,
                      const std::string& text_path) {
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("compare: cannot write " + csv_path);
    out << "label,runs,acc_mean,acc_std,f1_mean,f1_std,auc_mean,auc_std,kappa_mean,kappa_std,"
           "qwk_mean,qwk_std\n";
    for (const auto& r : rows) {
      out << r.label << "," << r.runs << "," << format_double(r.acc_mean) << ","
          << format_double(r.acc_std) << "," << format_double(r.f1_mean) << ","
          << format_double(r.f1_std) << "," << format_double(r.auc_mean) << ","
          << format_double(r.auc_std) << "," << format_double(r.kappa_mean) << ","
          << format_double(r.kappa_std) << "," << format_double(r.qwk_mean) << ","
          << format_double(r.qwk_std) << "\n";
    }
  }
  std::ofstream out(text_path);
  if (!out) throw std::runtime_error("compare: cannot write " + text_path);
  out << comparison_text(rows);
}

}  // namespace gradapt
