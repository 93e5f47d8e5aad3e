#include "gradapt/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gradapt {

namespace {

// Log-domain update: f_i = eps*log a_i - eps*LSE_j((g_j - C_ij)/eps).
// Potentials carry over between epsilon levels, which is what keeps small
// epsilon solvable: plain scaling contracts too slowly once the Gibbs kernel
// is near-degenerate.
void update_potentials(const Tensor& cost, const std::vector<double>& log_a,
                       const std::vector<double>& log_b, double eps, std::vector<double>& f,
                       std::vector<double>& g) {
  const std::size_t n = log_a.size();
  const std::size_t k = log_b.size();
  for (std::size_t i = 0; i < n; ++i) {
    double m = -1e300;
    for (std::size_t j = 0; j < k; ++j) m = std::max(m, (g[j] - cost.at(i, j)) / eps);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp((g[j] - cost.at(i, j)) / eps - m);
    f[i] = eps * (log_a[i] - m - std::log(s));
  }
  for (std::size_t j = 0; j < k; ++j) {
    double m = -1e300;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, (f[i] - cost.at(i, j)) / eps);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp((f[i] - cost.at(i, j)) / eps - m);
    g[j] = eps * (log_b[j] - m - std::log(s));
  }
}

double plan_violation(const Tensor& cost, const std::vector<double>& a,
                      const std::vector<double>& b, double eps, const std::vector<double>& f,
                      const std::vector<double>& g, Tensor* plan_out) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  double worst = 0.0;
  std::vector<double> col(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp((f[i] + g[j] - cost.at(i, j)) / eps);
      if (plan_out != nullptr) plan_out->at(i, j) = p;
      row += p;
      col[j] += p;
    }
    worst = std::max(worst, std::fabs(row - a[i]));
  }
  for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::fabs(col[j] - b[j]));
  return worst;
}

// Exact projection onto the transport polytope: scale overfull rows and
// columns down, then spread the remaining deficit as a rank-one term. Moves
// the plan by at most twice the pre-projection violation in L1 and leaves
// marginals exact to machine precision.
void round_to_marginals(Tensor& pi, const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += pi.at(i, j);
    if (row > a[i] && row > 0.0) {
      const double r = a[i] / row;
      for (std::size_t j = 0; j < k; ++j) pi.at(i, j) *= r;
    }
  }
  std::vector<double> col(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) col[j] += pi.at(i, j);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (col[j] > b[j] && col[j] > 0.0) {
      const double r = b[j] / col[j];
      for (std::size_t i = 0; i < n; ++i) pi.at(i, j) *= r;
    }
  }
  std::vector<double> err_a(n, 0.0);
  std::vector<double> err_b(k, 0.0);
  double deficit = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += pi.at(i, j);
    err_a[i] = std::max(0.0, a[i] - row);
  }
  for (std::size_t j = 0; j < k; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += pi.at(i, j);
    err_b[j] = std::max(0.0, b[j] - c);
    deficit += err_b[j];
  }
  if (deficit > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) pi.at(i, j) += err_a[i] * err_b[j] / deficit;
    }
  }
}

}  // namespace

TransportPlan sinkhorn(const Tensor& cost, const std::vector<double>& a,
                       const std::vector<double>& b, double epsilon, int max_iters,
                       double tol) {
  if (cost.shape.size() != 2) throw std::invalid_argument("sinkhorn: cost must be a matrix");
  const std::size_t n = cost.shape[0];
  const std::size_t k = cost.shape[1];
  if (a.size() != n || b.size() != k) throw std::invalid_argument("sinkhorn: marginal size mismatch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  auto check_marginal = [](const std::vector<double>& m) {
    double total = 0.0;
    for (double v : m) {
      if (!(v > 0.0)) throw std::invalid_argument("sinkhorn: marginals must be strictly positive");
      total += v;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("sinkhorn: marginals must sum to 1");
    }
  };
  check_marginal(a);
  check_marginal(b);

  std::vector<double> log_a(n);
  std::vector<double> log_b(k);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(a[i]);
  for (std::size_t j = 0; j < k; ++j) log_b[j] = std::log(b[j]);

  // Epsilon scaling: halve from a coarse level down to the target.
  std::vector<double> levels;
  double level = std::max(epsilon, 1.0);
  while (level > epsilon) {
    levels.push_back(level);
    level *= 0.5;
  }
  levels.push_back(epsilon);

  std::vector<double> f(n, 0.0);
  std::vector<double> g(k, 0.0);

  TransportPlan plan;
  plan.row_marginal = a;
  plan.col_marginal = b;
  plan.epsilon = epsilon;
  plan.pi = Tensor::zeros({n, k});

  int used = 0;
  double worst = 0.0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const bool final_level = li + 1 == levels.size();
    const double eps_l = levels[li];
    const double level_tol = final_level ? tol : std::max(tol, 1e-3);
    // Intermediate levels only need a handful of sweeps to track the path.
    const int level_cap = final_level ? max_iters - used : std::min(20, max_iters - used);
    int it = 0;
    worst = plan_violation(cost, a, b, eps_l, f, g, nullptr);
    while (worst > level_tol && it < level_cap) {
      update_potentials(cost, log_a, log_b, eps_l, f, g);
      ++it;
      ++used;
      worst = plan_violation(cost, a, b, eps_l, f, g, nullptr);
    }
  }

  worst = plan_violation(cost, a, b, epsilon, f, g, &plan.pi);
  plan.converged = worst <= tol;
  round_to_marginals(plan.pi, a, b);

  double rounded_worst = 0.0;
  std::vector<double> col(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += plan.pi.at(i, j);
      col[j] += plan.pi.at(i, j);
    }
    rounded_worst = std::max(rounded_worst, std::fabs(row - a[i]));
  }
  for (std::size_t j = 0; j < k; ++j) rounded_worst = std::max(rounded_worst, std::fabs(col[j] - b[j]));

  plan.iterations = used;
  plan.marginal_violation = rounded_worst;
  return plan;
}

}  // namespace gradapt
