#include "gradapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gradapt {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truths,
                          std::size_t classes) {
  if (preds.size() != truths.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = truths[i];
    const int p = preds[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes ||
        static_cast<std::size_t>(p) >= classes) {
      throw std::invalid_argument("confusion: class out of range");
    }
    cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p))++;
  }
  return cm;
}

Summary summary(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes;
  const double total = static_cast<double>(cm.total());
  if (total <= 0.0) throw std::invalid_argument("summary: empty confusion matrix");
  Summary s;
  s.recall.assign(k, 0.0);
  s.f1.assign(k, 0.0);
  s.class_defined.assign(k, true);
  double diag = 0.0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(cm.at(c, j));
      col += static_cast<double>(cm.at(j, c));
    }
    const double tp = static_cast<double>(cm.at(c, c));
    diag += tp;
    if (row == 0.0 && col == 0.0) s.class_defined[c] = false;
    s.recall[c] = row > 0.0 ? tp / row : 0.0;
    const double precision = col > 0.0 ? tp / col : 0.0;
    const double denom = precision + s.recall[c];
    s.f1[c] = denom > 0.0 ? 2.0 * precision * s.recall[c] / denom : 0.0;
    f1_sum += s.f1[c];
  }
  s.accuracy = diag / total;
  s.macro_f1 = f1_sum / static_cast<double>(k);
  return s;
}

KappaResult kappa(const ConfusionMatrix& cm, KappaWeighting weighting) {
  const std::size_t k = cm.classes;
  const double total = static_cast<double>(cm.total());
  if (total <= 0.0) throw std::invalid_argument("kappa: empty confusion matrix");
  std::vector<double> row(k, 0.0);
  std::vector<double> col(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row[i] += static_cast<double>(cm.at(i, j));
      col[j] += static_cast<double>(cm.at(i, j));
    }
  }
  const double denom_scale = k > 1 ? static_cast<double>((k - 1) * (k - 1)) : 1.0;
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double w;
      if (weighting == KappaWeighting::Quadratic) {
        const double d = static_cast<double>(i) - static_cast<double>(j);
        w = d * d / denom_scale;
      } else {
        w = i == j ? 0.0 : 1.0;
      }
      observed += w * static_cast<double>(cm.at(i, j));
      expected += w * row[i] * col[j] / total;
    }
  }
  KappaResult r;
  if (expected == 0.0) {
    r.defined = false;
    r.value = 0.0;
    return r;
  }
  r.value = 1.0 - observed / expected;
  return r;
}

RocAucResult roc_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& truths) {
  if (scores.size() != truths.size()) throw std::invalid_argument("roc_auc: length mismatch");
  if (scores.empty()) throw std::invalid_argument("roc_auc: empty input");
  const std::size_t k = scores[0].size();
  for (const auto& row : scores) {
    if (row.size() != k) throw std::invalid_argument("roc_auc: ragged score rows");
    double total = 0.0;
    for (double v : row) total += v;
    if (std::fabs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("roc_auc: score rows must sum to 1");
    }
  }

  RocAucResult res;
  res.auc.assign(k, 0.0);
  res.defined.assign(k, true);
  res.curves.resize(k);

  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pos = 0;
    for (int t : truths) {
      if (static_cast<std::size_t>(t) == c) ++pos;
    }
    const std::size_t neg = truths.size() - pos;
    if (pos == 0 || neg == 0) {
      res.defined[c] = false;
      continue;
    }

    // Sweep thresholds at distinct scores, descending; ties handled by
    // grouping, which makes the trapezoid equal to the rank statistic.
    std::vector<std::size_t> order(truths.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a][c] > scores[b][c];
    });

    auto& curve = res.curves[c];
    curve.push_back({0.0, 0.0, 1.0});
    double auc = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double prev_tpr = 0.0;
    double prev_fpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
      const double threshold = scores[order[i]][c];
      while (i < order.size() && scores[order[i]][c] == threshold) {
        if (static_cast<std::size_t>(truths[order[i]]) == c) {
          tp += 1.0;
        } else {
          fp += 1.0;
        }
        ++i;
      }
      const double tpr = tp / static_cast<double>(pos);
      const double fpr = fp / static_cast<double>(neg);
      auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
      curve.push_back({fpr, tpr, threshold});
      prev_tpr = tpr;
      prev_fpr = fpr;
    }
    res.auc[c] = auc;
  }

  double macro = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (res.defined[c]) {
      macro += res.auc[c];
      ++defined;
    }
  }
  res.macro_auc = defined > 0 ? macro / static_cast<double>(defined) : 0.0;
  return res;
}

}  // namespace gradapt
