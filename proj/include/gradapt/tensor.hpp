#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gradapt {

// Dense row-major tensor of 64-bit reals; the universal value carrier for
// features, probabilities, parameters and gradients. Shape [] is a scalar.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> v)
      : shape(std::move(s)), values(std::move(v)) {}

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    return Tensor({rows, cols}, std::move(v));
  }

  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<std::size_t> s, double fill) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return Tensor(std::move(s), std::vector<double>(n, fill));
  }

  std::size_t size() const { return values.size(); }
  bool is_scalar() const { return values.size() == 1 && shape.size() <= 1; }

  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace gradapt
