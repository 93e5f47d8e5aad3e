#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradapt/kernels.hpp"
#include "gradapt/rng.hpp"

using namespace gradapt;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -10.0, double hi = 10.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Magnitude-aware tolerance: reassociated sums agree with the sequential
// reference to a few ulps of the absolute-value sum.
double tol_for(const std::vector<double>& a, const std::vector<double>& b) {
  double mag = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) mag += std::fabs(a[i] * b[i]);
  return 1e-12 * mag;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 13, 31, 64, 257, 1003};

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(kern::backend_available(kern::Backend::Scalar));
}

TEST_CASE("simd and scalar kernels agree") {
  if (!kern::backend_available(kern::Backend::Avx2)) {
    MESSAGE("avx2 unavailable, equivalence run skipped");
    return;
  }
  Rng rng(0xc0ffee);
  for (std::size_t n : kSizes) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);

    kern::set_backend(kern::Backend::Scalar);
    const double dot_s = kern::dot(a.data(), b.data(), n);
    const double sum_s = kern::sum(a.data(), n);
    const double sq_s = kern::squared_distance(a.data(), b.data(), n);
    const double l1_s = kern::l1_distance(a.data(), b.data(), n);
    std::vector<double> axpy_s = b;
    kern::axpy(1.7, a.data(), axpy_s.data(), n);
    std::vector<double> had_s(n);
    kern::hadamard(a.data(), b.data(), had_s.data(), n);

    kern::set_backend(kern::Backend::Avx2);
    const double dot_v = kern::dot(a.data(), b.data(), n);
    const double sum_v = kern::sum(a.data(), n);
    const double sq_v = kern::squared_distance(a.data(), b.data(), n);
    const double l1_v = kern::l1_distance(a.data(), b.data(), n);
    std::vector<double> axpy_v = b;
    kern::axpy(1.7, a.data(), axpy_v.data(), n);
    std::vector<double> had_v(n);
    kern::hadamard(a.data(), b.data(), had_v.data(), n);

    CHECK(std::fabs(dot_s - dot_v) <= tol_for(a, b));
    CHECK(std::fabs(sum_s - sum_v) <= tol_for(a, std::vector<double>(n, 1.0)));
    CHECK(std::fabs(sq_s - sq_v) <= 1e-10 * (1.0 + std::fabs(sq_s)));
    CHECK(std::fabs(l1_s - l1_v) <= 1e-10 * (1.0 + std::fabs(l1_s)));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(axpy_s[i] == doctest::Approx(axpy_v[i]).epsilon(1e-14));
      CHECK(had_s[i] == had_v[i]);  // no reduction, lanewise identical
    }
    if (n > 0) {
      kern::set_backend(kern::Backend::Scalar);
      const double mx_s = kern::max_value(a.data(), n);
      kern::set_backend(kern::Backend::Avx2);
      CHECK(mx_s == kern::max_value(a.data(), n));
    }
  }
  kern::set_backend(kern::Backend::Scalar);
}

TEST_CASE("dot and norm basics") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {4.0, -5.0, 6.0};
  CHECK(kern::dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
  CHECK(kern::norm2(a.data(), 3) == doctest::Approx(std::sqrt(14.0)));
  CHECK(kern::squared_distance(a.data(), b.data(), 3) == doctest::Approx(9.0 + 49.0 + 9.0));
  CHECK(kern::l1_distance(a.data(), b.data(), 3) == doctest::Approx(3.0 + 7.0 + 3.0));
}

TEST_CASE("gemv against hand computation") {
  // A = [[1,2],[3,4],[5,6]], x = [1,-1]
  const std::vector<double> a = {1, 2, 3, 4, 5, 6};
  const std::vector<double> x = {1, -1};
  std::vector<double> y(3);
  kern::gemv(a.data(), 3, 2, x.data(), y.data());
  CHECK(y == std::vector<double>{-1, -1, -1});

  std::vector<double> z(2, 0.0);
  const std::vector<double> u = {1, 1, 1};
  kern::gemv_transposed_accumulate(a.data(), 3, 2, u.data(), z.data());
  CHECK(z == std::vector<double>{9, 12});

  std::vector<double> m(6, 0.0);
  kern::rank1_accumulate(m.data(), 3, 2, 2.0, u.data(), x.data());
  CHECK(m == std::vector<double>{2, -2, 2, -2, 2, -2});
}

TEST_CASE("exp and tanh are shared scalar paths") {
  std::vector<double> x = {-2.0, -0.5, 0.0, 0.5, 2.0};
  std::vector<double> e(x.size());
  std::vector<double> t(x.size());
  kern::exp_vec(x.data(), e.data(), x.size());
  kern::tanh_vec(x.data(), t.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(e[i] == std::exp(x[i]));
    CHECK(t[i] == std::tanh(x[i]));
  }
}
