#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradapt/nets.hpp"
#include "gradapt/rng.hpp"

using namespace gradapt;

namespace {

// One Adadelta step on a scalar, transcribed from the update equations.
double adadelta_scalar_oracle(double x, double g, double rho, double eps, double lr) {
  const double eg = (1.0 - rho) * g * g;
  const double dx = -std::sqrt(0.0 + eps) / std::sqrt(eg + eps) * g;
  return x + lr * dx;
}

}  // namespace

TEST_CASE("identity single-layer encoder maps x to x") {
  NetConfig cfg;
  cfg.input_dim = 3;
  cfg.feature_dim = 3;
  cfg.hidden = {};
  Rng rng(1);
  auto enc = make_encoder(cfg, rng);
  // overwrite with the identity
  std::fill(enc.mlp.layers[0].weight.values.begin(), enc.mlp.layers[0].weight.values.end(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) enc.mlp.layers[0].weight.at(i, i) = 1.0;
  const std::vector<double> x = {0.4, -1.2, 2.0};
  CHECK(encode(enc, x) == x);

  // zero weights: output equals the bias
  std::fill(enc.mlp.layers[0].weight.values.begin(), enc.mlp.layers[0].weight.values.end(), 0.0);
  enc.mlp.layers[0].bias.values = {1.0, 2.0, 3.0};
  CHECK(encode(enc, x) == std::vector<double>{1.0, 2.0, 3.0});

  CHECK_THROWS(encode(enc, {1.0, 2.0}));
}

TEST_CASE("encoder is deterministic under a fixed seed") {
  NetConfig cfg;
  Rng a(77);
  Rng b(77);
  auto e1 = make_encoder(cfg, a);
  auto e2 = make_encoder(cfg, b);
  std::vector<double> x(cfg.input_dim, 0.3);
  CHECK(encode(e1, x) == encode(e2, x));
}

TEST_CASE("parameter counts match the declared architecture") {
  NetConfig cfg;
  cfg.input_dim = 32;
  cfg.feature_dim = 16;
  cfg.hidden = {64, 64};
  cfg.classes = 5;
  cfg.noise_dim = 16;
  cfg.embed_dim = 8;
  cfg.generator_hidden = {64, 64};
  Rng rng(3);
  const auto enc = make_encoder(cfg, rng);
  const auto cls = make_classifier(cfg, rng);
  const auto gen = make_generator(cfg, rng);
  CHECK(parameter_count(enc) == 64 * 32 + 64 + 64 * 64 + 64 + 16 * 64 + 16);
  CHECK(parameter_count(cls) == 5 * 16 + 5);
  CHECK(parameter_count(gen) == 5 * 8 + 64 * 24 + 64 + 64 * 64 + 64 + 16 * 64 + 16);
}

TEST_CASE("classifier closed forms") {
  NetConfig cfg;
  cfg.feature_dim = 2;
  cfg.classes = 2;
  Rng rng(5);
  auto cls = make_classifier(cfg, rng);
  cls.weight.values = {1.0, 0.0, 0.0, 1.0};
  cls.bias.values = {0.0, 0.0};

  // one-hot feature picks its class
  const auto p = classify(cls, {2.0, 0.0});
  CHECK(p[0] == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  CHECK(p[0] > p[1]);

  // zero weights: uniform
  cls.weight.values = {0.0, 0.0, 0.0, 0.0};
  const auto u = classify(cls, {0.7, -0.4});
  CHECK(u[0] == doctest::Approx(0.5));
  CHECK(u[1] == doctest::Approx(0.5));
}

TEST_CASE("classification is invariant across repeated evaluation") {
  NetConfig cfg;
  Rng rng(7);
  auto enc = make_encoder(cfg, rng);
  auto cls = make_classifier(cfg, rng);
  std::vector<double> x(cfg.input_dim);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  const auto h = encode(enc, x);
  const auto p1 = classify(cls, h);
  const auto p2 = classify(cls, h);
  CHECK(p1 == p2);
}

TEST_CASE("generator determinism and zero-weight case") {
  NetConfig cfg;
  cfg.classes = 4;
  Rng rng(9);
  auto gen = make_generator(cfg, rng);
  std::vector<double> noise(cfg.noise_dim, 0.25);
  const auto f1 = generate(gen, noise, 2);
  const auto f2 = generate(gen, noise, 2);
  CHECK(f1 == f2);
  CHECK(generate(gen, noise, 1) != f1);
  CHECK_THROWS(generate(gen, noise, 4));
  CHECK_THROWS(generate(gen, noise, -1));

  for (auto& l : gen.mlp.layers) {
    std::fill(l.weight.values.begin(), l.weight.values.end(), 0.0);
    std::fill(l.bias.values.begin(), l.bias.values.end(), 0.0);
  }
  gen.mlp.layers.back().bias.values[0] = 0.5;
  const auto f3 = generate(gen, noise, 0);
  CHECK(f3[0] == doctest::Approx(0.5));
  for (std::size_t i = 1; i < f3.size(); ++i) CHECK(f3[i] == 0.0);
}

TEST_CASE("mlp backward matches numerical derivatives") {
  NetConfig cfg;
  cfg.input_dim = 4;
  cfg.feature_dim = 3;
  cfg.hidden = {5};
  Rng rng(11);
  auto enc = make_encoder(cfg, rng);
  std::vector<double> x = {0.2, -0.4, 0.8, 0.1};

  // loss = sum(h): dy = ones
  MlpCache cache;
  auto h = encode(enc, x, &cache);
  auto grads = make_grads(enc.mlp);
  const auto dx = mlp_backward(enc.mlp, cache, std::vector<double>(h.size(), 1.0), grads);

  const double step = 1e-6;
  auto loss_at = [&](const std::vector<double>& xx) {
    const auto hh = encode(enc, xx);
    double s = 0.0;
    for (double v : hh) s += v;
    return s;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x;
    auto xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (loss_at(xp) - loss_at(xm)) / (2.0 * step);
    CHECK(dx[i] == doctest::Approx(fd).epsilon(1e-5));
  }

  // parameter gradient spot-check on the first layer weight
  for (std::size_t idx : {std::size_t{0}, std::size_t{7}, std::size_t{13}}) {
    const double saved = enc.mlp.layers[0].weight.values[idx];
    enc.mlp.layers[0].weight.values[idx] = saved + step;
    const double up = loss_at(x);
    enc.mlp.layers[0].weight.values[idx] = saved - step;
    const double down = loss_at(x);
    enc.mlp.layers[0].weight.values[idx] = saved;
    CHECK(grads.layers[0].weight.values[idx] ==
          doctest::Approx((up - down) / (2 * step)).epsilon(1e-5));
  }
}

TEST_CASE("normalize backward matches numerical derivatives") {
  Rng rng(13);
  std::vector<double> h = {0.5, -1.0, 2.0};
  const auto nf = normalize_feature(h);
  // loss = unit[0] + 2*unit[1] - unit[2]
  const std::vector<double> d_unit = {1.0, 2.0, -1.0};
  const auto dh = normalize_backward(nf, d_unit);
  const double step = 1e-7;
  auto loss_at = [&](const std::vector<double>& v) {
    auto nn = normalize_feature(v);
    return nn.unit[0] + 2.0 * nn.unit[1] - nn.unit[2];
  };
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto hp = h;
    auto hm = h;
    hp[i] += step;
    hm[i] -= step;
    CHECK(dh[i] == doctest::Approx((loss_at(hp) - loss_at(hm)) / (2 * step)).epsilon(1e-5));
  }
  CHECK_THROWS(normalize_feature({0.0, 0.0}));
}

TEST_CASE("adadelta zero gradient leaves parameters unchanged") {
  NetConfig cfg;
  Rng rng(15);
  auto cls = make_classifier(cfg, rng);
  auto params = named_parameters(cls, "classifier");
  auto st = make_adadelta(params, {});
  const auto before = cls.weight.values;
  std::vector<Tensor> grads = {Tensor::zeros(cls.weight.shape), Tensor::zeros(cls.bias.shape)};
  adadelta_step(params, grads, st);
  CHECK(cls.weight.values == before);
}

TEST_CASE("adadelta single scalar step matches the hand oracle") {
  ClassifierParams cls;
  cls.weight = Tensor::matrix(1, 1, {2.0});
  cls.bias = Tensor::vector({0.0});
  auto params = named_parameters(cls, "w");
  AdadeltaConfig cfg;
  cfg.rho = 0.9;
  cfg.epsilon = 1e-6;
  cfg.lr = 0.1;
  auto st = make_adadelta(params, cfg);
  std::vector<Tensor> grads = {Tensor::matrix(1, 1, {1.0}), Tensor::vector({0.0})};
  adadelta_step(params, grads, st);
  CHECK(cls.weight.values[0] == doctest::Approx(adadelta_scalar_oracle(2.0, 1.0, 0.9, 1e-6, 0.1))
                                    .epsilon(1e-12));
}

TEST_CASE("adadelta determinism and error paths") {
  NetConfig cfg;
  Rng r1(17);
  Rng r2(17);
  auto c1 = make_classifier(cfg, r1);
  auto c2 = make_classifier(cfg, r2);
  auto p1 = named_parameters(c1, "c");
  auto p2 = named_parameters(c2, "c");
  auto s1 = make_adadelta(p1, {});
  auto s2 = make_adadelta(p2, {});
  std::vector<Tensor> grads = {Tensor::full(c1.weight.shape, 0.3), Tensor::full(c1.bias.shape, -0.1)};
  adadelta_step(p1, grads, s1);
  adadelta_step(p2, grads, s2);
  CHECK(c1.weight.values == c2.weight.values);
  CHECK(c1.bias.values == c2.bias.values);

  std::vector<Tensor> bad = {Tensor::full(c1.weight.shape, 0.3), Tensor::vector({1.0})};
  CHECK_THROWS(adadelta_step(p1, bad, s1));
  std::vector<Tensor> nan_grads = grads;
  nan_grads[0].values[0] = std::nan("");
  CHECK_THROWS_WITH_AS(adadelta_step(p1, nan_grads, s1),
                       doctest::Contains("c.weight"), std::runtime_error);
}

TEST_CASE("one adadelta step decreases a convex quadratic") {
  // f(x) = 0.5 * ||x - t||^2 on a seeded start
  Rng rng(19);
  ClassifierParams v;
  v.weight = Tensor::matrix(1, 4, {1.0, -2.0, 0.5, 3.0});
  v.bias = Tensor::vector({0.0});
  const std::vector<double> target = {0.0, 1.0, 0.0, -1.0};
  auto params = named_parameters(v, "x");
  auto st = make_adadelta(params, {});
  auto f = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double d = v.weight.values[i] - target[i];
      s += 0.5 * d * d;
    }
    return s;
  };
  const double before = f();
  Tensor g = Tensor::zeros({1, 4});
  for (std::size_t i = 0; i < 4; ++i) g.values[i] = v.weight.values[i] - target[i];
  adadelta_step(params, {g, Tensor::zeros({1})}, st);
  CHECK(f() < before);
}

TEST_CASE("generator backward matches numerical derivatives") {
  NetConfig cfg;
  cfg.noise_dim = 3;
  cfg.embed_dim = 2;
  cfg.feature_dim = 2;
  cfg.generator_hidden = {4};
  cfg.classes = 3;
  Rng rng(21);
  auto gen = make_generator(cfg, rng);
  const std::vector<double> noise = {0.1, -0.2, 0.4};
  const int label = 1;

  MlpCache cache;
  auto f = generate(gen, noise, label, &cache);
  auto grads = make_grads(gen.mlp);
  Tensor d_emb = Tensor::zeros(gen.embedding.shape);
  generator_backward(gen, cache, noise, label, std::vector<double>(f.size(), 1.0), grads, d_emb);

  const double step = 1e-6;
  auto loss_at = [&]() {
    const auto ff = generate(gen, noise, label);
    double s = 0.0;
    for (double vv : ff) s += vv;
    return s;
  };
  // embedding row gradient
  for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
    const std::size_t idx = static_cast<std::size_t>(label) * cfg.embed_dim + j;
    const double saved = gen.embedding.values[idx];
    gen.embedding.values[idx] = saved + step;
    const double up = loss_at();
    gen.embedding.values[idx] = saved - step;
    const double down = loss_at();
    gen.embedding.values[idx] = saved;
    CHECK(d_emb.values[idx] == doctest::Approx((up - down) / (2 * step)).epsilon(1e-5));
  }
  // rows of other labels untouched
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    if (c == static_cast<std::size_t>(label)) continue;
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
      CHECK(d_emb.values[c * cfg.embed_dim + j] == 0.0);
    }
  }
}
