#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradapt/graph.hpp"
#include "gradapt/rng.hpp"

using namespace gradapt;

TEST_CASE("softmax of zeros is uniform") {
  Graph g;
  const NodeId z = g.input("z", {2});
  const NodeId s = g.softmax(z);
  const auto vals = evaluate(g, {{"z", Tensor::vector({0.0, 0.0})}});
  CHECK(vals[static_cast<std::size_t>(s)].values[0] == doctest::Approx(0.5));
  CHECK(vals[static_cast<std::size_t>(s)].values[1] == doctest::Approx(0.5));
}

TEST_CASE("softmax rows sum to one within 1e-12") {
  Graph g;
  const NodeId z = g.input("z", {4, 6});
  const NodeId s = g.softmax(z);
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> raw(24);
    for (auto& v : raw) v = rng.uniform(-15.0, 15.0);
    const auto vals = evaluate(g, {{"z", Tensor({4, 6}, raw)}});
    const Tensor& sm = vals[static_cast<std::size_t>(s)];
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < 6; ++c) {
        const double p = sm.at(r, c);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        total += p;
      }
      CHECK(std::fabs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("softmax shift keeps extreme logits finite") {
  Graph g;
  const NodeId z = g.input("z", {5});
  const NodeId s = g.softmax(z);
  const auto vals = evaluate(g, {{"z", Tensor::vector({700.0, -700.0, 0.0, 350.0, -350.0})}});
  const Tensor& sm = vals[static_cast<std::size_t>(s)];
  double total = 0.0;
  for (double p : sm.values) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("matmul identity returns the vector") {
  Graph g;
  const NodeId a = g.input("A", {3, 3});
  const NodeId x = g.input("x", {3});
  const NodeId y = g.matmul(a, x);
  const Bindings b = {{"A", Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1})},
                      {"x", Tensor::vector({2.5, -1.0, 4.0})}};
  const auto vals = evaluate(g, b);
  CHECK(vals[static_cast<std::size_t>(y)].values == std::vector<double>{2.5, -1.0, 4.0});
}

TEST_CASE("cosine similarity of orthogonal vectors is zero") {
  Graph g;
  const NodeId a = g.input("a", {2});
  const NodeId b = g.input("b", {2});
  const NodeId c = g.cosine_similarity(a, b);
  const auto vals =
      evaluate(g, {{"a", Tensor::vector({1, 0})}, {"b", Tensor::vector({0, 1})}});
  CHECK(vals[static_cast<std::size_t>(c)].values[0] == doctest::Approx(0.0));
}

TEST_CASE("evaluate is pure: identical bindings give bit-identical outputs") {
  Graph g;
  const NodeId z = g.input("z", {5});
  const NodeId s = g.softmax(z);
  const NodeId l = g.log(s);
  const NodeId out = g.neg(g.sum(l));
  (void)out;
  const Bindings b = {{"z", Tensor::vector({0.3, -1.2, 2.2, 0.0, -0.4})}};
  const auto v1 = evaluate(g, b);
  const auto v2 = evaluate(g, b);
  for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1[i].values == v2[i].values);
  (void)l;
}

TEST_CASE("d(x dot x)/dx = 2x") {
  Graph g;
  const NodeId x = g.input("x", {1});
  const NodeId y = g.sum(g.mul(x, x));
  const auto grads = gradient(g, {{"x", Tensor::vector({3.0})}}, y);
  CHECK(grads.at("x").values[0] == doctest::Approx(6.0));
}

TEST_CASE("gradient of sum(softmax(z)) vanishes") {
  Graph g;
  const NodeId z = g.input("z", {6});
  const NodeId y = g.sum(g.softmax(z));
  const auto grads = gradient(g, {{"z", Tensor::vector({1, -2, 0.5, 3, -1, 0})}}, y);
  for (double v : grads.at("z").values) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("gradient rejects non-scalar outputs") {
  Graph g;
  const NodeId z = g.input("z", {3});
  const NodeId s = g.softmax(z);
  CHECK_THROWS_AS(gradient(g, {{"z", Tensor::vector({1, 2, 3})}}, s), GraphError);
}

TEST_CASE("shape mismatch is rejected with the offending node") {
  Graph g;
  const NodeId a = g.input("a", {2});
  const NodeId b = g.input("b", {3});
  CHECK_THROWS_AS(g.add(a, b), GraphError);

  Graph g2;
  const NodeId x = g2.input("x", {2});
  g2.sum(x);
  CHECK_THROWS_AS(evaluate(g2, {{"x", Tensor::vector({1, 2, 3})}}), GraphError);
}

TEST_CASE("non-finite intermediates are rejected") {
  Graph g;
  const NodeId x = g.input("x", {2});
  const NodeId l = g.log(x);
  g.sum(l);
  CHECK_THROWS_AS(evaluate(g, {{"x", Tensor::vector({1.0, -1.0})}}), GraphError);
}

TEST_CASE("cross-entropy gradient matches central differences") {
  // -sum(y * log p) bound directly on probabilities.
  Graph g;
  const NodeId p = g.input("p", {2});
  const NodeId y = g.constant(Tensor::vector({1.0, 0.0}));
  const NodeId loss = g.neg(g.sum(g.mul(y, g.log(p))));
  const Bindings b = {{"p", Tensor::vector({0.7, 0.3})}};
  CHECK(finite_difference_check(g, b, loss, 1e-5) < 1e-6);
  const auto grads = gradient(g, b, loss);
  CHECK(grads.at("p").values[0] == doctest::Approx(-1.0 / 0.7));
  CHECK(grads.at("p").values[1] == doctest::Approx(0.0));
}

TEST_CASE("finite differences are near-exact for linear graphs") {
  Graph g;
  const NodeId x = g.input("x", {4});
  const NodeId a = g.constant(Tensor::vector({0.5, -1.5, 2.0, 3.0}));
  const NodeId y = g.sum(g.mul(a, x));
  const Bindings b = {{"x", Tensor::vector({1.0, 2.0, -0.5, 0.25})}};
  CHECK(finite_difference_check(g, b, y, 1e-3) <= 1e-10);
}

TEST_CASE("trace and outer behave and differentiate") {
  Graph g;
  const NodeId a = g.input("a", {3});
  const NodeId b = g.input("b", {3});
  const NodeId o = g.outer(a, b);
  const NodeId loss = g.add(g.sum(o), g.neg(g.trace(o)));
  const Bindings bind = {{"a", Tensor::vector({0.2, 0.5, 0.3})},
                         {"b", Tensor::vector({0.6, 0.1, 0.3})}};
  const auto vals = evaluate(g, bind);
  // sum(outer) - trace(outer) = (sum a)(sum b) - a.b = 1 - 0.26
  CHECK(vals[static_cast<std::size_t>(loss)].values[0] == doctest::Approx(1.0 - 0.26));
  CHECK(finite_difference_check(g, bind, loss, 1e-5) < 1e-8);
}

TEST_CASE("random composite graphs pass finite-difference checks") {
  Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    Graph g;
    const NodeId z = g.input("z", {5});
    const NodeId w = g.input("w", {5});
    const NodeId s = g.softmax(z);
    const NodeId e = g.exp(g.neg(g.mul(w, s)));
    const NodeId c = g.cosine_similarity(w, s);
    const NodeId loss = g.add(g.mean(e), g.mul(c, c));
    Bindings b;
    std::vector<double> zv(5), wv(5);
    for (auto& v : zv) v = rng.uniform(-2.0, 2.0);
    for (auto& v : wv) v = rng.uniform(0.1, 2.0);
    b["z"] = Tensor::vector(zv);
    b["w"] = Tensor::vector(wv);
    CHECK(finite_difference_check(g, b, loss, 1e-5) < 1e-4);
  }
}
