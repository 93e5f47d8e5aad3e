#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradapt/metrics.hpp"
#include "gradapt/rng.hpp"

using namespace gradapt;

namespace {

// Rank-statistic AUC: P(score_pos > score_neg) + 0.5 P(ties).
double mann_whitney_auc(const std::vector<double>& s, const std::vector<bool>& is_pos) {
  double wins = 0.0;
  std::size_t np = 0;
  std::size_t nn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_pos[i]) continue;
    ++np;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (is_pos[j]) continue;
      if (s[i] > s[j]) {
        wins += 1.0;
      } else if (s[i] == s[j]) {
        wins += 0.5;
      }
    }
  }
  for (bool p : is_pos) {
    if (!p) ++nn;
  }
  return wins / (static_cast<double>(np) * static_cast<double>(nn));
}

// Kappa straight from prediction pairs, bypassing the confusion matrix path.
double direct_kappa(const std::vector<int>& preds, const std::vector<int>& truths, int k,
                    bool quadratic) {
  const double n = static_cast<double>(preds.size());
  std::vector<double> row(static_cast<std::size_t>(k), 0.0);
  std::vector<double> col(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    row[static_cast<std::size_t>(truths[i])] += 1.0;
    col[static_cast<std::size_t>(preds[i])] += 1.0;
  }
  auto weight = [&](int i, int j) {
    if (quadratic) {
      const double d = i - j;
      return d * d / static_cast<double>((k - 1) * (k - 1));
    }
    return i == j ? 0.0 : 1.0;
  };
  double observed = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) observed += weight(truths[i], preds[i]);
  double expected = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      expected += weight(i, j) * row[static_cast<std::size_t>(i)] *
                  col[static_cast<std::size_t>(j)] / n;
    }
  }
  return 1.0 - observed / expected;
}

}  // namespace

TEST_CASE("confusion counts by hand") {
  const auto cm = confusion({0, 1, 0}, {0, 1, 1}, 2);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 0);
  CHECK(cm.at(1, 0) == 1);
  CHECK(cm.at(1, 1) == 1);

  const auto diag = confusion({0, 1, 2}, {0, 1, 2}, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(diag.at(i, j) == (i == j ? 1 : 0));
  }

  const auto empty = confusion({}, {}, 4);
  CHECK(empty.total() == 0);
  CHECK_THROWS(confusion({5}, {0}, 3));
}

TEST_CASE("summary on hand-computed matrices") {
  ConfusionMatrix cm;
  cm.classes = 2;
  cm.counts = {8, 2, 3, 7};
  const auto s = summary(cm);
  CHECK(s.accuracy == doctest::Approx(0.75));
  const double p0 = 8.0 / 11.0;
  const double r0 = 8.0 / 10.0;
  CHECK(s.f1[0] == doctest::Approx(2 * p0 * r0 / (p0 + r0)));

  ConfusionMatrix sym;
  sym.classes = 2;
  sym.counts = {1, 1, 1, 1};
  const auto s2 = summary(sym);
  CHECK(s2.accuracy == doctest::Approx(0.5));
  CHECK(s2.f1[0] == doctest::Approx(0.5));
  CHECK(s2.f1[1] == doctest::Approx(0.5));

  ConfusionMatrix perfect;
  perfect.classes = 3;
  perfect.counts = {4, 0, 0, 0, 2, 0, 0, 0, 5};
  const auto s3 = summary(perfect);
  CHECK(s3.accuracy == doctest::Approx(1.0));
  CHECK(s3.macro_f1 == doctest::Approx(1.0));
  for (double r : s3.recall) CHECK(r == doctest::Approx(1.0));
}

TEST_CASE("kappa trivial cases") {
  ConfusionMatrix diag;
  diag.classes = 3;
  diag.counts = {3, 0, 0, 0, 4, 0, 0, 0, 2};
  CHECK(kappa(diag, KappaWeighting::None).value == doctest::Approx(1.0));
  CHECK(kappa(diag, KappaWeighting::Quadratic).value == doctest::Approx(1.0));

  // Outer product of its own marginals -> chance agreement, kappa = 0.
  ConfusionMatrix chance;
  chance.classes = 2;
  chance.counts = {9, 21, 3, 7};  // rows (30,10), cols (12,28), total 40
  CHECK(kappa(chance, KappaWeighting::None).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kappa(chance, KappaWeighting::Quadratic).value == doctest::Approx(0.0).epsilon(1e-12));

  ConfusionMatrix single;
  single.classes = 2;
  single.counts = {5, 0, 0, 0};
  CHECK_FALSE(kappa(single, KappaWeighting::None).defined);
}

TEST_CASE("one grade off: quadratic kappa exceeds unweighted") {
  ConfusionMatrix cm;
  cm.classes = 5;
  cm.counts.assign(25, 0);
  for (std::size_t i = 0; i + 1 < 5; ++i) cm.at(i, i + 1) = 10;
  cm.at(4, 3) = 10;
  const auto plain = kappa(cm, KappaWeighting::None);
  const auto quad = kappa(cm, KappaWeighting::Quadratic);
  CHECK(quad.value > plain.value);
}

TEST_CASE("kappa matches direct-formula oracle on random matrices") {
  Rng rng(404);
  for (int rep = 0; rep < 100; ++rep) {
    const int k = static_cast<int>(rng.uniform_int(2, 6));
    const int n = static_cast<int>(rng.uniform_int(10, 200));
    std::vector<int> preds(static_cast<std::size_t>(n));
    std::vector<int> truths(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      truths[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, k - 1));
      // correlate predictions with truth so kappa is informative
      preds[static_cast<std::size_t>(i)] = rng.uniform() < 0.6
                                               ? truths[static_cast<std::size_t>(i)]
                                               : static_cast<int>(rng.uniform_int(0, k - 1));
    }
    const auto cm = confusion(preds, truths, static_cast<std::size_t>(k));
    const auto plain = kappa(cm, KappaWeighting::None);
    const auto quad = kappa(cm, KappaWeighting::Quadratic);
    if (plain.defined) {
      CHECK(std::fabs(plain.value - direct_kappa(preds, truths, k, false)) < 1e-10);
    }
    if (quad.defined) {
      CHECK(std::fabs(quad.value - direct_kappa(preds, truths, k, true)) < 1e-10);
    }
    CHECK(plain.value <= 1.0 + 1e-12);
  }
}

TEST_CASE("auc trivial cases") {
  // Perfect separation.
  const std::vector<std::vector<double>> scores = {
      {0.9, 0.1}, {0.8, 0.2}, {0.2, 0.8}, {0.1, 0.9}};
  const std::vector<int> truths = {0, 0, 1, 1};
  const auto r = roc_auc(scores, truths);
  CHECK(r.auc[0] == doctest::Approx(1.0));
  CHECK(r.auc[1] == doctest::Approx(1.0));

  // Constant scores: single tie group, trapezoid gives 0.5.
  const std::vector<std::vector<double>> flat = {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}};
  const auto r2 = roc_auc(flat, {0, 1, 0});
  CHECK(r2.auc[0] == doctest::Approx(0.5));
  CHECK(r2.auc[1] == doctest::Approx(0.5));

  // Missing positives -> undefined, excluded from macro.
  const std::vector<std::vector<double>> s3 = {
      {0.7, 0.2, 0.1}, {0.3, 0.6, 0.1}, {0.5, 0.4, 0.1}, {0.2, 0.7, 0.1}};
  const auto r3 = roc_auc(s3, {0, 1, 0, 1});
  CHECK_FALSE(r3.defined[2]);
  CHECK(r3.defined[0]);
  CHECK(r3.defined[1]);
  CHECK(r3.macro_auc == doctest::Approx((r3.auc[0] + r3.auc[1]) / 2.0));
}

TEST_CASE("auc equals rank-statistic oracle on random instances") {
  Rng rng(505);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = static_cast<int>(rng.uniform_int(4, 60));
    std::vector<std::vector<double>> scores(static_cast<std::size_t>(n));
    std::vector<int> truths(static_cast<std::size_t>(n));
    bool has0 = false;
    bool has1 = false;
    for (int i = 0; i < n; ++i) {
      // quantized scores produce deliberate ties
      const double p = std::round(rng.uniform() * 8.0) / 8.0;
      scores[static_cast<std::size_t>(i)] = {p, 1.0 - p};
      truths[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 0 : 1;
      (truths[static_cast<std::size_t>(i)] == 0 ? has0 : has1) = true;
    }
    if (!has0 || !has1) continue;
    const auto r = roc_auc(scores, truths);
    std::vector<double> s0(static_cast<std::size_t>(n));
    std::vector<bool> pos0(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s0[static_cast<std::size_t>(i)] = scores[static_cast<std::size_t>(i)][0];
      pos0[static_cast<std::size_t>(i)] = truths[static_cast<std::size_t>(i)] == 0;
    }
    CHECK(std::fabs(r.auc[0] - mann_whitney_auc(s0, pos0)) < 1e-10);
  }
}

TEST_CASE("auc invariant under strictly monotone score transforms") {
  // Softmax-normalized rows restrict transforms; emulate by comparing the
  // binary case where p -> p^3 / (p^3 + (1-p)^3) preserves order.
  Rng rng(606);
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<double>> warped;
  std::vector<int> truths;
  for (int i = 0; i < 40; ++i) {
    const double p = rng.uniform(0.01, 0.99);
    const double q = p * p * p / (p * p * p + (1 - p) * (1 - p) * (1 - p));
    scores.push_back({p, 1 - p});
    warped.push_back({q, 1 - q});
    truths.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  truths[0] = 0;
  truths[1] = 1;
  const auto a = roc_auc(scores, truths);
  const auto b = roc_auc(warped, truths);
  CHECK(a.auc[0] == doctest::Approx(b.auc[0]).epsilon(1e-12));
}
