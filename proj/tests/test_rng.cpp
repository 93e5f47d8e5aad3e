#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradapt/rng.hpp"

using namespace gradapt;

TEST_CASE("streams are deterministic and independent") {
  Rng a = Rng::stream(42, "data");
  Rng b = Rng::stream(42, "data");
  Rng c = Rng::stream(42, "init");
  bool diverged = false;
  for (int i = 0; i < 32; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("uniform stays in range") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the range without bias artifacts") {
  Rng rng(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) counts[static_cast<std::size_t>(rng.uniform_int(0, 4))]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("normal moments") {
  Rng rng(13);
  double s = 0.0;
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::fabs(s / n) < 0.02);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("beta moments match alpha/(alpha+beta)") {
  Rng rng(17);
  const double alpha = 2.0;
  const double beta = 5.0;
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.beta(alpha, beta);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    s += x;
  }
  CHECK(std::fabs(s / n - alpha / (alpha + beta)) < 0.01);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(19);
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7};
  auto w = v;
  rng.shuffle(w);
  std::vector<int> seen(8, 0);
  for (int x : w) seen[static_cast<std::size_t>(x)]++;
  for (int s : seen) CHECK(s == 1);
}
