#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradapt/active.hpp"
#include "gradapt/rng.hpp"

using namespace gradapt;

namespace {

// Naive double-loop estimate with its own kernel evaluation; the
// implementation's incremental sums are checked against this.
double mmd_oracle(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b, const KernelSpec& k) {
  auto kv = [&](const std::vector<double>& x, const std::vector<double>& y) {
    if (k.kind == KernelSpec::Kind::Linear) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
      return s;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sq += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-sq / (2.0 * k.bandwidth * k.bandwidth));
  };
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (const auto& x : a) {
    for (const auto& y : a) saa += kv(x, y);
  }
  for (const auto& x : b) {
    for (const auto& y : b) sbb += kv(x, y);
  }
  for (const auto& x : a) {
    for (const auto& y : b) sab += kv(x, y);
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return saa / (na * na) + sbb / (nb * nb) - 2.0 * sab / (na * nb);
}

std::vector<LocalRepr> wrap(const std::vector<std::vector<double>>& pts) {
  std::vector<LocalRepr> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i].v = pts[i];
    out[i].owner = static_cast<int>(i);
  }
  return out;
}

// Full recomputation per candidate, per step.
std::vector<int> greedy_oracle(const std::vector<std::vector<double>>& pts,
                               std::vector<int> labeled, std::size_t budget,
                               const KernelSpec& k) {
  std::vector<int> picks;
  std::vector<char> taken(pts.size(), 0);
  for (int id : labeled) taken[static_cast<std::size_t>(id)] = 1;
  for (std::size_t step = 0; step < budget; ++step) {
    int best = -1;
    double best_val = 1e300;
    for (std::size_t x = 0; x < pts.size(); ++x) {
      if (taken[x]) continue;
      std::vector<std::vector<double>> b;
      for (int id : labeled) b.push_back(pts[static_cast<std::size_t>(id)]);
      b.push_back(pts[x]);
      const double v = mmd_oracle(pts, b, k);
      if (v < best_val) {
        best_val = v;
        best = static_cast<int>(x);
      }
    }
    picks.push_back(best);
    labeled.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
  }
  return picks;
}

}  // namespace

TEST_CASE("local representation hand example") {
  // single sample, self as sole neighbor: h * (pW) + h
  const std::vector<std::vector<double>> feats = {{1.0, 1.0}};
  const std::vector<std::vector<double>> probs = {{1.0, 0.0}};
  const Tensor w = Tensor::matrix(2, 2, {2, 3, 5, 7});
  const auto lr = local_representation(0, feats, probs, w, 1);
  CHECK(lr.v == std::vector<double>{3.0, 4.0});
  CHECK(lr.neighbors == std::vector<int>{0});
}

TEST_CASE("zero classifier weight reduces to the neighborhood mean") {
  Rng rng(3);
  std::vector<std::vector<double>> feats;
  std::vector<std::vector<double>> probs;
  for (int i = 0; i < 6; ++i) {
    feats.push_back({rng.uniform(0.5, 1.5), rng.uniform(-1.0, 1.0)});
    probs.push_back({0.5, 0.5});
  }
  const Tensor w0 = Tensor::zeros({2, 2});
  const auto lrs = local_representations(feats, probs, w0, 3);
  for (const auto& lr : lrs) {
    std::vector<double> mean(2, 0.0);
    for (int j : lr.neighbors) {
      mean[0] += feats[static_cast<std::size_t>(j)][0] / 3.0;
      mean[1] += feats[static_cast<std::size_t>(j)][1] / 3.0;
    }
    CHECK(lr.v[0] == doctest::Approx(mean[0]));
    CHECK(lr.v[1] == doctest::Approx(mean[1]));
  }
}

TEST_CASE("identical samples give identical local representations") {
  const std::vector<std::vector<double>> feats(5, std::vector<double>{0.7, -0.3, 0.2});
  const std::vector<std::vector<double>> probs(5, std::vector<double>{0.2, 0.8});
  const Tensor w = Tensor::matrix(2, 3, {1, 0, 1, 0, 1, 0});
  const auto lrs = local_representations(feats, probs, w, 4);
  for (std::size_t i = 1; i < lrs.size(); ++i) CHECK(lrs[i].v == lrs[0].v);
}

TEST_CASE("k_nn bounds are enforced") {
  const std::vector<std::vector<double>> feats = {{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<std::vector<double>> probs = {{1.0, 0.0}, {0.0, 1.0}};
  const Tensor w = Tensor::zeros({2, 2});
  CHECK_THROWS(local_representations(feats, probs, w, 0));
  CHECK_THROWS(local_representations(feats, probs, w, 3));
}

TEST_CASE("mmd of a set with itself is zero") {
  Rng rng(5);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
  const auto lrs = wrap(pts);
  KernelSpec k;
  k.bandwidth = 1.0;
  CHECK(std::fabs(mmd_squared(lrs, lrs, k)) < 1e-12);
  KernelSpec lin;
  lin.kind = KernelSpec::Kind::Linear;
  CHECK(std::fabs(mmd_squared(lrs, lrs, lin)) < 1e-12);
}

TEST_CASE("linear kernel hand case: A={0}, B={2} gives 4") {
  const auto a = wrap({{0.0}});
  const auto b = wrap({{2.0}});
  KernelSpec lin;
  lin.kind = KernelSpec::Kind::Linear;
  CHECK(mmd_squared(a, b, lin) == doctest::Approx(4.0));
}

TEST_CASE("mmd is symmetric, nonnegative for rbf, and matches the oracle") {
  Rng rng(7);
  KernelSpec k;
  k.bandwidth = 0.8;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> b;
    const int na = static_cast<int>(rng.uniform_int(1, 8));
    const int nb = static_cast<int>(rng.uniform_int(1, 8));
    for (int i = 0; i < na; ++i) a.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    for (int i = 0; i < nb; ++i) b.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double ab = mmd_squared(wrap(a), wrap(b), k);
    const double ba = mmd_squared(wrap(b), wrap(a), k);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= -1e-12);
    CHECK(ab == doctest::Approx(mmd_oracle(a, b, k)).epsilon(1e-10));
  }
  CHECK_THROWS(mmd_squared(wrap({}), wrap({{1.0}}), k));
}

TEST_CASE("greedy pick equals exhaustive per-step argmin") {
  Rng rng(9);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(4, 12));
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    }
    KernelSpec k;
    k.kind = rep % 2 == 0 ? KernelSpec::Kind::Rbf : KernelSpec::Kind::Linear;
    k.bandwidth = 1.1;
    const std::size_t budget = static_cast<std::size_t>(rng.uniform_int(1, 3));
    const auto got = greedy_select(wrap(pts), {}, budget, k);
    const auto want = greedy_oracle(pts, {}, budget, k);
    CHECK(got == want);
  }
}

TEST_CASE("two separated clusters: budget 2 takes one point per cluster") {
  // brute force over all 2-subsets confirms the greedy pair
  std::vector<std::vector<double>> pts;
  Rng rng(11);
  for (int i = 0; i < 6; ++i) pts.push_back({rng.uniform(-0.2, 0.2), rng.uniform(9.8, 10.2)});
  for (int i = 0; i < 6; ++i) pts.push_back({rng.uniform(9.8, 10.2), rng.uniform(-0.2, 0.2)});
  KernelSpec lin;
  lin.kind = KernelSpec::Kind::Linear;

  const auto picks = greedy_select(wrap(pts), {}, 2, lin);
  const bool first_cluster_a = picks[0] < 6;
  const bool second_cluster_a = picks[1] < 6;
  CHECK(first_cluster_a != second_cluster_a);

  // exhaustive check over all 2-subsets: the optimum spans both clusters,
  // and any same-cluster pair is strictly worse than the greedy pair
  double best = 1e300;
  std::pair<int, int> best_pair{-1, -1};
  double best_same_cluster = 1e300;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      const double v = mmd_oracle(pts, {pts[static_cast<std::size_t>(i)],
                                        pts[static_cast<std::size_t>(j)]},
                                  lin);
      if (v < best) {
        best = v;
        best_pair = {i, j};
      }
      if ((i < 6) == (j < 6)) best_same_cluster = std::min(best_same_cluster, v);
    }
  }
  CHECK((best_pair.first < 6) != (best_pair.second < 6));
  const double got = mmd_oracle(
      pts, {pts[static_cast<std::size_t>(picks[0])], pts[static_cast<std::size_t>(picks[1])]},
      lin);
  CHECK(got >= best - 1e-12);
  CHECK(got < best_same_cluster);
}

TEST_CASE("identical points tie-break to the lowest ids") {
  const std::vector<std::vector<double>> pts(7, std::vector<double>{1.0, 1.0});
  KernelSpec k;
  k.bandwidth = 1.0;
  const auto picks = greedy_select(wrap(pts), {}, 3, k);
  CHECK(picks == std::vector<int>{0, 1, 2});
}

TEST_CASE("greedy select is pure given fixed inputs") {
  Rng rng(13);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 9; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
  KernelSpec k;  // median-heuristic rbf
  const auto a = greedy_select(wrap(pts), {1, 4}, 3, k);
  const auto b = greedy_select(wrap(pts), {1, 4}, 3, k);
  CHECK(a == b);
  for (int id : a) {
    CHECK(id != 1);
    CHECK(id != 4);
  }
}

TEST_CASE("run_round bookkeeping") {
  auto spec = DomainSpec{};
  spec.n = 30;
  spec.input_dim = 4;
  spec.classes = 3;
  spec.curve.angle_step = 0.7;
  auto data = make_target(spec, spec, 17);
  LabelOracle oracle(&data);

  DatasetPartition part;
  part.init(spec.n);

  // build trivial local representations straight from inputs
  std::vector<LocalRepr> lrs(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    lrs[i].v = data.x[i];
    lrs[i].owner = static_cast<int>(i);
  }
  KernelSpec k;

  const auto round0 = run_round(part, lrs, k, 6, oracle, 0);
  CHECK(round0.selected.size() == 6);
  CHECK(part.labeled_ids.size() == 6);
  CHECK(std::isnan(round0.mmd_before));
  CHECK(round0.mmd_after >= -1e-12);

  const auto round1 = run_round(part, lrs, k, 6, oracle, 1);
  CHECK(part.labeled_ids.size() == 12);
  CHECK(round1.mmd_before >= round1.mmd_after - 1e-9);  // growing the set helps
  // selected sets disjoint from prior labels
  for (int id : round1.selected) {
    CHECK(std::find(round0.selected.begin(), round0.selected.end(), id) ==
          round0.selected.end());
  }
  CHECK(oracle.distinct_queries() == 12);

  // exhaustion: labeling everything leaves the pool empty
  const auto rest = part.unlabeled_ids();
  const auto round2 = run_round(part, lrs, k, rest.size(), oracle, 2);
  CHECK(part.unlabeled_ids().empty());
  CHECK(round2.selected.size() == rest.size());
  CHECK_THROWS(run_round(part, lrs, k, 1, oracle, 3));
}

TEST_CASE("random rounds draw from the unlabeled pool") {
  auto spec = DomainSpec{};
  spec.n = 25;
  spec.input_dim = 4;
  spec.classes = 3;
  auto data = make_target(spec, spec, 19);
  LabelOracle oracle(&data);
  DatasetPartition part;
  part.init(spec.n);
  Rng rng = Rng::stream(7, "active.select");
  const auto r0 = run_round_random(part, 10, oracle, rng, 0);
  CHECK(r0.selected.size() == 10);
  std::vector<char> seen(spec.n, 0);
  for (int id : r0.selected) {
    CHECK(!seen[static_cast<std::size_t>(id)]);
    seen[static_cast<std::size_t>(id)] = 1;
  }
  const auto r1 = run_round_random(part, 15, oracle, rng, 1);
  CHECK(part.unlabeled_ids().empty());
  (void)r1;
}
