#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gradapt/kernels.hpp"
#include "gradapt/synth.hpp"

using namespace gradapt;

namespace {

DomainSpec base_spec() {
  DomainSpec s;
  s.n = 1000;
  s.input_dim = 8;
  s.classes = 5;
  s.class_sigma = 0.3;
  return s;
}

}  // namespace

TEST_CASE("class means sit on an ordinal curve") {
  const auto spec = base_spec();
  const auto means = curve_class_means(spec);
  // distance strictly increasing in the grade gap
  for (std::size_t gap = 2; gap < spec.classes; ++gap) {
    for (std::size_t c = 0; c + gap < spec.classes; ++c) {
      const double wide =
          kern::squared_distance(means[c].data(), means[c + gap].data(), spec.input_dim);
      const double narrow =
          kern::squared_distance(means[c].data(), means[c + gap - 1].data(), spec.input_dim);
      CHECK(wide > narrow);
    }
  }
}

TEST_CASE("largest remainder gives exact uniform counts") {
  auto spec = base_spec();
  spec.proportions = {0.2, 0.2, 0.2, 0.2, 0.2};
  const auto data = make_source(spec, 11);
  std::vector<int> counts(5, 0);
  for (int l : data.labels) counts[static_cast<std::size_t>(l)]++;
  for (int c : counts) CHECK(c == 200);
}

TEST_CASE("zero sigma collapses points onto class means") {
  auto spec = base_spec();
  spec.class_sigma = 0.0;
  spec.n = 50;
  const auto data = make_source(spec, 4);
  const auto means = curve_class_means(spec);
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const auto& m = means[static_cast<std::size_t>(data.labels[i])];
    CHECK(kern::squared_distance(data.x[i].data(), m.data(), spec.input_dim) == 0.0);
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto spec = base_spec();
  const auto a = make_source(spec, 123);
  const auto b = make_source(spec, 123);
  CHECK(a.labels == b.labels);
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  const auto c = make_source(spec, 124);
  CHECK(a.x[0] != c.x[0]);
}

TEST_CASE("invalid specs are rejected") {
  auto spec = base_spec();
  spec.class_sigma = -1.0;
  CHECK_THROWS(make_source(spec, 1));
  spec = base_spec();
  spec.proportions = {0.5, 0.5, 0.0, 0.0, 0.5};
  CHECK_THROWS(make_source(spec, 1));
  spec = base_spec();
  spec.curve.angle_step = 1.2;  // 4 * 1.2 > pi folds the helix back
  CHECK_THROWS(make_source(spec, 1));
  spec = base_spec();
  spec.shift.scale = 0.0;
  CHECK_THROWS(make_target(spec, base_spec(), 1));
}

TEST_CASE("no-shift target matches the source process") {
  auto spec = base_spec();
  spec.n = 2000;
  const auto src = make_source(spec, 5);
  const auto tgt = make_target(spec, spec, 6);
  // linear-kernel two-sample MMD^2 on the means of the point clouds
  std::vector<double> ms(spec.input_dim, 0.0);
  std::vector<double> mt(spec.input_dim, 0.0);
  for (const auto& x : src.x) kern::axpy(1.0 / src.x.size(), x.data(), ms.data(), spec.input_dim);
  for (const auto& x : tgt.x) kern::axpy(1.0 / tgt.x.size(), x.data(), mt.data(), spec.input_dim);
  CHECK(kern::squared_distance(ms.data(), mt.data(), spec.input_dim) < 1e-2);
}

TEST_CASE("outliers are counted exactly and labeled by the nearest mean") {
  auto spec = base_spec();
  spec.n = 2000;
  spec.outlier_fraction = 0.05;
  spec.shift.scale = 1.1;
  spec.shift.offset = 0.3;
  spec.shift.rotations = {{0, 1, 0.4}};
  const auto tgt = make_target(spec, base_spec(), 9);
  std::size_t n_out = 0;
  for (bool o : tgt.outlier) n_out += o ? 1 : 0;
  CHECK(n_out == 100);
  for (std::size_t i = 0; i < tgt.x.size(); ++i) {
    if (!tgt.outlier[i]) continue;
    // label equals nearest shifted class mean
    int best = 0;
    double best_d = kern::squared_distance(tgt.x[i].data(), tgt.class_means[0].data(),
                                           spec.input_dim);
    for (std::size_t c = 1; c < spec.classes; ++c) {
      const double d =
          kern::squared_distance(tgt.x[i].data(), tgt.class_means[c].data(), spec.input_dim);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    CHECK(tgt.labels[i] == best);
  }
}

TEST_CASE("oracle audits distinct queries") {
  auto spec = base_spec();
  spec.n = 20;
  const auto tgt = make_target(spec, spec, 3);
  LabelOracle oracle(&tgt);
  CHECK(oracle.label(4) == tgt.labels[4]);
  CHECK(oracle.label(4) == tgt.labels[4]);
  CHECK(oracle.label(7) == tgt.labels[7]);
  CHECK(oracle.distinct_queries() == 2);
  CHECK(oracle.total_calls() == 3);
  CHECK_THROWS(oracle.label(99));
}

TEST_CASE("dataset round-trips exactly through csv") {
  auto spec = base_spec();
  spec.n = 40;
  spec.outlier_fraction = 0.1;
  spec.shift.offset = 0.25;
  const auto tgt = make_target(spec, base_spec(), 21);
  const auto dir = std::filesystem::temp_directory_path();
  const auto fpath = (dir / "gradapt_feat_test.csv").string();
  const auto lpath = (dir / "gradapt_label_test.csv").string();
  export_dataset(tgt, fpath, lpath);
  const auto back = import_dataset(fpath, lpath);
  CHECK(back.input_dim == tgt.input_dim);
  CHECK(back.labels == tgt.labels);
  for (std::size_t i = 0; i < tgt.x.size(); ++i) CHECK(back.x[i] == tgt.x[i]);
  for (std::size_t i = 0; i < tgt.outlier.size(); ++i) CHECK(back.outlier[i] == tgt.outlier[i]);
  std::filesystem::remove(fpath);
  std::filesystem::remove(lpath);
}
