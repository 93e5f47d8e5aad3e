#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradapt/rng.hpp"
#include "gradapt/sinkhorn.hpp"

using namespace gradapt;

namespace {

// Exact 2x2 transport optimum: one free parameter, linear objective, so the
// minimum sits at an endpoint of the feasible interval.
Tensor lp_2x2(const Tensor& cost, double a0, double b0) {
  const double lo = std::max(0.0, a0 + b0 - 1.0);
  const double hi = std::min(a0, b0);
  const double slope = cost.at(0, 0) - cost.at(0, 1) - cost.at(1, 0) + cost.at(1, 1);
  const double t = slope >= 0.0 ? lo : hi;
  Tensor pi = Tensor::zeros({2, 2});
  pi.at(0, 0) = t;
  pi.at(0, 1) = a0 - t;
  pi.at(1, 0) = b0 - t;
  pi.at(1, 1) = 1.0 - a0 - b0 + t;
  return pi;
}

}  // namespace

TEST_CASE("constant cost gives the product plan") {
  Tensor cost = Tensor::full({3, 4}, 2.5);
  const std::vector<double> a = {0.2, 0.3, 0.5};
  const std::vector<double> b = {0.1, 0.2, 0.3, 0.4};
  const auto plan = sinkhorn(cost, a, b, 0.05, 200, 1e-9);
  CHECK(plan.converged);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::fabs(plan.pi.at(i, j) - a[i] * b[j]) < 1e-10);
    }
  }
}

TEST_CASE("2x2 anti-diagonal cost at small epsilon approaches the permutation") {
  Tensor cost = Tensor::matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
  const std::vector<double> a = {0.5, 0.5};
  const std::vector<double> b = {0.5, 0.5};
  const auto plan = sinkhorn(cost, a, b, 0.01, 500, 1e-10);
  const auto lp = lp_2x2(cost, 0.5, 0.5);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::fabs(plan.pi.values[i] - lp.values[i]) < 1e-3);
  }
}

TEST_CASE("marginals hold on random cost matrices") {
  Rng rng(777);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 16));
    Tensor cost = Tensor::zeros({n, k});
    for (auto& v : cost.values) v = rng.uniform(0.0, 2.0);
    const double eps = rng.uniform(0.01, 0.2);
    std::vector<double> a(n);
    std::vector<double> b(k);
    double sa = 0.0;
    double sb = 0.0;
    for (auto& v : a) {
      v = rng.uniform(0.2, 1.0);
      sa += v;
    }
    for (auto& v : b) {
      v = rng.uniform(0.2, 1.0);
      sb += v;
    }
    for (auto& v : a) v /= sa;
    for (auto& v : b) v /= sb;

    const auto plan = sinkhorn(cost, a, b, eps, 500, 1e-7);
    CHECK(plan.marginal_violation < 1e-6);
    for (double v : plan.pi.values) CHECK(v >= 0.0);

    // explicit row/col sums
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += plan.pi.at(i, j);
      CHECK(std::fabs(s - a[i]) < 1e-6);
    }
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += plan.pi.at(i, j);
      CHECK(std::fabs(s - b[j]) < 1e-6);
    }
  }
}

TEST_CASE("random 2x2 instances approach the enumerated optimum") {
  Rng rng(778);
  for (int rep = 0; rep < 25; ++rep) {
    Tensor cost = Tensor::zeros({2, 2});
    for (auto& v : cost.values) v = rng.uniform(0.0, 1.0);
    // keep the LP minimum strict so the entropic plan has a clear target
    if (std::fabs(cost.at(0, 0) - cost.at(0, 1) - cost.at(1, 0) + cost.at(1, 1)) < 0.3) continue;
    const std::vector<double> a = {0.5, 0.5};
    const std::vector<double> b = {0.5, 0.5};
    const auto plan = sinkhorn(cost, a, b, 0.01, 500, 1e-10);
    const auto lp = lp_2x2(cost, 0.5, 0.5);
    double cost_plan = 0.0;
    double cost_lp = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      cost_plan += plan.pi.values[i] * cost.values[i];
      cost_lp += lp.values[i] * cost.values[i];
    }
    CHECK(cost_plan <= cost_lp + 1e-2);
    CHECK(cost_plan >= cost_lp - 1e-12);
  }
}

TEST_CASE("non-convergence is flagged, not thrown") {
  Tensor cost = Tensor::matrix(2, 2, {0.05, 0.9, 0.3, 0.1});
  const std::vector<double> a = {0.3, 0.7};
  const std::vector<double> b = {0.6, 0.4};
  const auto plan = sinkhorn(cost, a, b, 0.01, 1, 1e-14);
  CHECK_FALSE(plan.converged);
  CHECK(plan.iterations == 1);
  // the rounded plan is still feasible
  CHECK(plan.marginal_violation < 1e-12);
}

TEST_CASE("invalid marginals are rejected") {
  Tensor cost = Tensor::matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
  CHECK_THROWS(sinkhorn(cost, {0.5, 0.5}, {1.0, 0.0}, 0.05, 10, 1e-6));
  CHECK_THROWS(sinkhorn(cost, {0.9, 0.2}, {0.5, 0.5}, 0.05, 10, 1e-6));
  CHECK_THROWS(sinkhorn(cost, {0.5, 0.5}, {0.5, 0.5}, -1.0, 10, 1e-6));
}
