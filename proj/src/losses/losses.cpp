#include "gradapt/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "gradapt/kernels.hpp"

namespace gradapt {

double l2_normalize(std::vector<double>& v) {
  const double n = kern::norm2(v.data(), v.size());
  if (n == 0.0) throw std::invalid_argument("zero-norm feature vector");
  kern::scale(v.data(), 1.0 / n, v.size());
  return n;
}

double cross_entropy(const std::vector<double>& p, const std::vector<double>& y) {
  if (p.size() != y.size()) throw std::invalid_argument("cross_entropy: length mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (y[k] > 0.0) {
      if (p[k] <= 0.0) throw std::domain_error("cross_entropy: log of nonpositive probability");
      loss -= y[k] * std::log(p[k]);
    }
  }
  return loss;
}

namespace {

// Margin contrastive from already-normalized rows; one shared path for the
// ordinal and prototype variants.
double margin_contrastive_value(const std::vector<double>& anchor,
                                const std::vector<std::vector<double>>& members,
                                const std::vector<double>& margins, double tau) {
  const std::size_t d = anchor.size();
  std::vector<double> exponents(members.size());
  for (std::size_t j = 0; j < members.size(); ++j) {
    exponents[j] = (kern::dot(members[j].data(), anchor.data(), d) - margins[j]) / tau;
  }
  const double m = kern::max_value(exponents.data(), exponents.size());
  double denom = 0.0;
  for (double e : exponents) denom += std::exp(e - m);
  return -(exponents[0] - m - std::log(denom));
}

std::vector<double> normalized_copy(const std::vector<double>& v) {
  std::vector<double> out = v;
  l2_normalize(out);
  return out;
}

}  // namespace

double ordinal_contrastive(const std::vector<double>& anchor,
                           const std::vector<double>& positive,
                           const std::vector<std::vector<double>>& negatives,
                           const std::vector<int>& neg_grade_dist,
                           const OrdinalContrastiveParams& params) {
  if (negatives.empty()) throw std::invalid_argument("ordinal_contrastive: no negatives");
  if (negatives.size() != neg_grade_dist.size()) {
    throw std::invalid_argument("ordinal_contrastive: one grade distance per negative");
  }
  if (!(params.tau > 0.0)) throw std::invalid_argument("ordinal_contrastive: tau must be positive");
  const auto a = normalized_copy(anchor);
  std::vector<std::vector<double>> members;
  members.reserve(negatives.size() + 1);
  members.push_back(normalized_copy(positive));
  std::vector<double> margins;
  margins.reserve(negatives.size() + 1);
  margins.push_back(params.gamma);
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    members.push_back(normalized_copy(negatives[j]));
    margins.push_back(params.beta0 * std::abs(neg_grade_dist[j]));
  }
  return margin_contrastive_value(a, members, margins, params.tau);
}

double prototype_contrastive(const std::vector<double>& feature,
                             const std::vector<std::vector<double>>& prototypes, int label,
                             double tau) {
  const std::size_t k = prototypes.size();
  if (k < 2) throw std::invalid_argument("prototype_contrastive: need at least two classes");
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw std::invalid_argument("prototype_contrastive: label out of range");
  }
  const auto f = normalized_copy(feature);
  std::vector<std::vector<double>> members;
  members.reserve(k);
  members.push_back(normalized_copy(prototypes[static_cast<std::size_t>(label)]));
  for (std::size_t c = 0; c < k; ++c) {
    if (c != static_cast<std::size_t>(label)) members.push_back(normalized_copy(prototypes[c]));
  }
  const std::vector<double> margins(k, 0.0);
  return margin_contrastive_value(f, members, margins, tau);
}

TransportTargets transport_soft_labels(const std::vector<std::vector<double>>& weak_features,
                                       const std::vector<std::vector<double>>& prototypes,
                                       double epsilon, int max_iters, double tol,
                                       double tau_scale,
                                       const std::vector<double>* class_marginal) {
  const std::size_t n = weak_features.size();
  const std::size_t k = prototypes.size();
  if (n == 0) throw std::invalid_argument("transport_soft_labels: empty batch");
  std::vector<std::vector<double>> protos_n;
  protos_n.reserve(k);
  for (const auto& p : prototypes) protos_n.push_back(normalized_copy(p));

  Tensor cost = Tensor::zeros({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = normalized_copy(weak_features[i]);
    for (std::size_t j = 0; j < k; ++j) {
      cost.at(i, j) = 1.0 - kern::dot(w.data(), protos_n[j].data(), w.size());
    }
  }

  const std::vector<double> a(n, 1.0 / static_cast<double>(n));
  std::vector<double> b(k, 1.0 / static_cast<double>(k));
  if (class_marginal != nullptr) {
    if (class_marginal->size() != k) {
      throw std::invalid_argument("transport_soft_labels: class marginal size mismatch");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      b[j] = std::max((*class_marginal)[j], 1e-3);  // keep marginals strictly positive
      total += b[j];
    }
    for (auto& v : b) v /= total;
  }
  TransportTargets out;
  out.plan = sinkhorn(cost, a, b, epsilon, max_iters, tol);

  out.soft_labels = Tensor::zeros({n, k});
  std::vector<double> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += out.plan.pi.at(i, j);
    for (std::size_t j = 0; j < k; ++j) row[j] = tau_scale * out.plan.pi.at(i, j) / total;
    const double m = kern::max_value(row.data(), k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = std::exp(row[j] - m);
      z += row[j];
    }
    for (std::size_t j = 0; j < k; ++j) out.soft_labels.at(i, j) = row[j] / z;
  }
  return out;
}

double transport_consistency(const std::vector<std::vector<double>>& weak_features,
                             const std::vector<std::vector<double>>& prototypes,
                             const std::vector<std::vector<double>>& strong_logits,
                             double epsilon, int max_iters, double tol, double tau_scale) {
  if (weak_features.size() != strong_logits.size()) {
    throw std::invalid_argument("transport_consistency: batch size mismatch");
  }
  const auto targets =
      transport_soft_labels(weak_features, prototypes, epsilon, max_iters, tol, tau_scale);
  const std::size_t n = strong_logits.size();
  const std::size_t k = prototypes.size();
  double loss = 0.0;
  std::vector<double> probs(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = kern::max_value(strong_logits[i].data(), k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      probs[j] = std::exp(strong_logits[i][j] - m);
      z += probs[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      loss += std::fabs(targets.soft_labels.at(i, j) - probs[j] / z);
    }
  }
  return loss / static_cast<double>(n);
}

double probability_agreement_loss(const std::vector<double>& p_weak,
                                  const std::vector<double>& p_strong) {
  if (p_weak.size() != p_strong.size()) {
    throw std::invalid_argument("probability_agreement_loss: length mismatch");
  }
  auto check = [](const std::vector<double>& p) {
    double total = 0.0;
    for (double v : p) total += v;
    if (std::fabs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("probability_agreement_loss: inputs must sum to 1");
    }
  };
  check(p_weak);
  check(p_strong);
  // All entries of the outer product minus its trace.
  double total = 0.0;
  double diag = 0.0;
  for (std::size_t i = 0; i < p_weak.size(); ++i) {
    for (std::size_t j = 0; j < p_strong.size(); ++j) total += p_weak[i] * p_strong[j];
    diag += p_weak[i] * p_strong[i];
  }
  return total - diag;
}

MixupResult mixup_with_lambda(const std::vector<double>& x_i, const std::vector<double>& y_i,
                              const std::vector<double>& x_j, const std::vector<double>& y_j,
                              double lambda) {
  if (x_i.size() != x_j.size() || y_i.size() != y_j.size()) {
    throw std::invalid_argument("mixup: size mismatch");
  }
  MixupResult r;
  r.lambda = lambda;
  r.x.resize(x_i.size());
  r.y.resize(y_i.size());
  for (std::size_t t = 0; t < x_i.size(); ++t) r.x[t] = lambda * x_i[t] + (1.0 - lambda) * x_j[t];
  for (std::size_t t = 0; t < y_i.size(); ++t) r.y[t] = lambda * y_i[t] + (1.0 - lambda) * y_j[t];
  return r;
}

MixupResult mixup(const std::vector<double>& x_i, const std::vector<double>& y_i,
                  const std::vector<double>& x_j, const std::vector<double>& y_j, double alpha,
                  double beta, Rng& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("mixup: alpha, beta must be > 0");
  return mixup_with_lambda(x_i, y_i, x_j, y_j, rng.beta(alpha, beta));
}

double total_loss(const std::vector<double>& terms, const LossWeights& weights) {
  if (terms.size() != 5) throw std::invalid_argument("total_loss: expected 5 terms");
  if (weights.proto_align < 0.0 || weights.inter < 0.0 || weights.intra < 0.0 ||
      weights.mix < 0.0) {
    throw std::invalid_argument("total_loss: weights must be nonnegative");
  }
  return terms[0] + weights.proto_align * terms[1] + weights.inter * terms[2] +
         weights.intra * terms[3] + weights.mix * terms[4];
}

LossGraph make_cross_entropy_probs_graph(std::size_t classes) {
  LossGraph lg;
  const NodeId p = lg.graph.input("p", {classes});
  const NodeId y = lg.graph.input("y", {classes}, /*differentiable=*/false);
  lg.loss = lg.graph.neg(lg.graph.sum(lg.graph.mul(y, lg.graph.log(p))));
  return lg;
}

LossGraph make_cross_entropy_logits_graph(std::size_t batch, std::size_t classes) {
  LossGraph lg;
  const NodeId z = lg.graph.input("logits", {batch, classes});
  const NodeId y = lg.graph.input("targets", {batch, classes}, /*differentiable=*/false);
  const NodeId s = lg.graph.softmax(z);
  const NodeId per = lg.graph.mul(y, lg.graph.log(s));
  const NodeId inv_b = lg.graph.constant(Tensor::scalar(1.0 / static_cast<double>(batch)));
  lg.loss = lg.graph.mul(lg.graph.neg(lg.graph.sum(per)), inv_b);
  return lg;
}

namespace {

// positive + negatives stacked as rows; softmax over margin-shifted scaled
// similarities keeps the denominator max-shifted.
NodeId margin_contrastive_nodes(Graph& g, NodeId anchor, NodeId members, NodeId margins,
                                NodeId inv_tau, std::size_t rows) {
  const NodeId sims = g.matmul(members, anchor);
  const NodeId shifted = g.add(sims, g.neg(margins));
  const NodeId scaled = g.mul(shifted, inv_tau);
  const NodeId s = g.softmax(scaled);
  std::vector<double> pick(rows, 0.0);
  pick[0] = 1.0;
  const NodeId mask = g.constant(Tensor::vector(pick));
  return g.neg(g.log(g.sum(g.mul(s, mask))));
}

}  // namespace

LossGraph make_margin_contrastive_graph(std::size_t negatives, std::size_t dim) {
  if (negatives == 0) throw std::invalid_argument("margin contrastive graph: no negatives");
  const std::size_t rows = negatives + 1;
  LossGraph lg;
  const NodeId anchor = lg.graph.input("anchor", {dim});
  const NodeId members = lg.graph.input("members", {rows, dim});
  const NodeId margins = lg.graph.input("margins", {rows}, /*differentiable=*/false);
  const NodeId inv_tau = lg.graph.input("inv_tau", {}, /*differentiable=*/false);
  lg.loss = margin_contrastive_nodes(lg.graph, anchor, members, margins, inv_tau, rows);
  return lg;
}

LossGraph make_transport_consistency_graph(std::size_t batch, std::size_t classes) {
  LossGraph lg;
  const NodeId z = lg.graph.input("strong_logits", {batch, classes});
  const NodeId q = lg.graph.input("soft_labels", {batch, classes}, /*differentiable=*/false);
  const NodeId s = lg.graph.softmax(z);
  const NodeId inv_n = lg.graph.constant(Tensor::scalar(1.0 / static_cast<double>(batch)));
  lg.loss = lg.graph.mul(lg.graph.l1_distance(q, s), inv_n);
  return lg;
}

LossGraph make_agreement_probs_graph(std::size_t classes) {
  LossGraph lg;
  const NodeId pw = lg.graph.input("p_weak", {classes});
  const NodeId ps = lg.graph.input("p_strong", {classes});
  const NodeId o = lg.graph.outer(pw, ps);
  lg.loss = lg.graph.add(lg.graph.sum(o), lg.graph.neg(lg.graph.trace(o)));
  return lg;
}

LossGraph make_agreement_logits_graph(std::size_t classes) {
  LossGraph lg;
  const NodeId zw = lg.graph.input("weak_logits", {classes});
  const NodeId zs = lg.graph.input("strong_logits", {classes});
  const NodeId o = lg.graph.outer(lg.graph.softmax(zw), lg.graph.softmax(zs));
  lg.loss = lg.graph.add(lg.graph.sum(o), lg.graph.neg(lg.graph.trace(o)));
  return lg;
}

LossGraph make_weighted_total_graph() {
  LossGraph lg;
  const NodeId terms = lg.graph.input("terms", {5});
  const NodeId weights = lg.graph.input("weights", {5}, /*differentiable=*/false);
  lg.loss = lg.graph.sum(lg.graph.mul(terms, weights));
  return lg;
}

LossGraph make_total_objective_graph(std::size_t batch, std::size_t classes, std::size_t dim) {
  LossGraph lg;
  Graph& g = lg.graph;

  const NodeId ce_z = g.input("ce_logits", {batch, classes});
  const NodeId ce_y = g.input("ce_targets", {batch, classes}, false);
  const NodeId inv_b = g.constant(Tensor::scalar(1.0 / static_cast<double>(batch)));
  const NodeId ce =
      g.mul(g.neg(g.sum(g.mul(ce_y, g.log(g.softmax(ce_z))))), inv_b);

  const NodeId anchor = g.input("anchor", {dim});
  const NodeId members = g.input("members", {classes, dim});
  const NodeId margins = g.input("margins", {classes}, false);
  const NodeId inv_tau = g.input("inv_tau", {}, false);
  const NodeId proto = margin_contrastive_nodes(g, anchor, members, margins, inv_tau, classes);

  const NodeId strong_z = g.input("strong_logits", {batch, classes});
  const NodeId soft = g.input("soft_labels", {batch, classes}, false);
  const NodeId inter = g.mul(g.l1_distance(soft, g.softmax(strong_z)), inv_b);

  const NodeId aw = g.input("agree_weak", {classes});
  const NodeId as = g.input("agree_strong", {classes});
  const NodeId o = g.outer(g.softmax(aw), g.softmax(as));
  const NodeId intra = g.add(g.sum(o), g.neg(g.trace(o)));

  const NodeId mix_z = g.input("mix_logits", {batch, classes});
  const NodeId mix_y = g.input("mix_targets", {batch, classes}, false);
  const NodeId mix =
      g.mul(g.neg(g.sum(g.mul(mix_y, g.log(g.softmax(mix_z))))), inv_b);

  const NodeId weights = g.input("weights", {5}, false);
  // weighted sum in fixed term order: ce, proto, inter, intra, mix
  auto pick = [&](std::size_t i) {
    std::vector<double> m(5, 0.0);
    m[i] = 1.0;
    return g.sum(g.mul(weights, g.constant(Tensor::vector(m))));
  };
  NodeId total = g.mul(ce, pick(0));
  total = g.add(total, g.mul(proto, pick(1)));
  total = g.add(total, g.mul(inter, pick(2)));
  total = g.add(total, g.mul(intra, pick(3)));
  total = g.add(total, g.mul(mix, pick(4)));
  lg.loss = total;
  return lg;
}

}  // namespace gradapt
