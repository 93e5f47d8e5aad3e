#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gradapt {

// Seeded random stream. All draw algorithms live here (Box-Muller normals,
// Marsaglia-Tsang gammas, rejection-free bounded ints) so sequences do not
// depend on the standard library's distribution implementations. Named
// sub-streams derived from one root seed keep components independent:
// toggling one consumer never shifts another's draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng stream(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [lo, hi] inclusive, unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal, Box-Muller (one value per call, spare discarded).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double gamma(double shape);  // shape > 0, unit scale
  double beta(double a, double b);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gradapt
