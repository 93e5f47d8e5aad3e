#pragma once

#include <vector>

#include "gradapt/tensor.hpp"

namespace gradapt {

// Entropic-regularized transport plan between n samples and K classes.
struct TransportPlan {
  Tensor pi;                        // [n, K], nonnegative
  std::vector<double> row_marginal;  // a, length n
  std::vector<double> col_marginal;  // b, length K
  double epsilon = 0.0;
  int iterations = 0;                // iterations actually run
  double marginal_violation = 0.0;   // max absolute row/col sum error
  bool converged = true;             // false when max_iters hit above tol
};

// Log-domain Sinkhorn with epsilon scaling, followed by an exact rounding
// step onto the transport polytope, so returned marginals always hold to
// machine precision. `converged` reports whether the entropic iteration
// itself reached tol within max_iters; a false flag means the plan is
// feasible but may sit further from the entropic optimum.
// a and b must be strictly positive and sum to 1; epsilon > 0.
TransportPlan sinkhorn(const Tensor& cost, const std::vector<double>& a,
                       const std::vector<double>& b, double epsilon, int max_iters,
                       double tol);

}  // namespace gradapt
