#pragma once

#include <cstdint>
#include <vector>

namespace gradapt {

// K x K counts, rows = truth, columns = prediction.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::int64_t> counts;  // row-major

  std::int64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * classes + pred]; }
  std::int64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * classes + pred];
  }
  std::int64_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truths,
                          std::size_t classes);

struct Summary {
  double accuracy = 0.0;
  std::vector<double> recall;        // diag / row sum
  std::vector<double> f1;            // harmonic precision/recall, 0 when undefined
  double macro_f1 = 0.0;
  std::vector<bool> class_defined;   // false when a class has no truth and no predictions
};

Summary summary(const ConfusionMatrix& cm);

enum class KappaWeighting { None, Quadratic };

struct KappaResult {
  double value = 0.0;
  bool defined = true;  // false when expected disagreement is zero
};

KappaResult kappa(const ConfusionMatrix& cm, KappaWeighting weighting);

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;
};

struct RocAucResult {
  std::vector<double> auc;            // per class, one-vs-rest
  std::vector<bool> defined;          // false when a class lacks positives or negatives
  double macro_auc = 0.0;             // mean over defined classes
  std::vector<std::vector<RocPoint>> curves;
};

// scores: one probability row per sample (rows must sum to 1 within 1e-6).
RocAucResult roc_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& truths);

}  // namespace gradapt
