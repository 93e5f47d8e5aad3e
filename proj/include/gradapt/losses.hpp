#pragma once

#include <vector>

#include "gradapt/graph.hpp"
#include "gradapt/rng.hpp"
#include "gradapt/sinkhorn.hpp"
#include "gradapt/tensor.hpp"

// Loss terms for source training and adaptation. Each term exists as a plain
// function and, where training needs gradients, as a Graph builder whose
// inputs are the already-normalized features or raw logits. Builders only
// fix shapes; temperatures, margins and weights are bound at call time, so
// one graph per shape can be cached and re-bound inside a loop.

namespace gradapt {

struct OrdinalContrastiveParams {
  double tau = 0.5;     // temperature, > 0
  double gamma = 0.1;   // positive-pair margin, >= 0
  double beta0 = 0.1;   // per-negative margin slope in grade distance
};

struct LossWeights {
  double proto_align = 1.0;  // prototype contrastive term
  double inter = 1.0;        // transport consistency term
  double intra = 1.0;        // view agreement term
  double mix = 1.0;          // mixup cross-entropy term
};

// --- plain functions ------------------------------------------------------

// -sum_k y_k log p_k over positions with y_k > 0. Rejects p_k <= 0 there.
double cross_entropy(const std::vector<double>& p, const std::vector<double>& y);

// Margin contrastive over one positive and m negatives; margins grow with
// grade distance: beta_j = beta0 * |grade(anchor) - grade(negative_j)|.
// Inputs are L2-normalized internally; zero-norm vectors are rejected.
double ordinal_contrastive(const std::vector<double>& anchor,
                           const std::vector<double>& positive,
                           const std::vector<std::vector<double>>& negatives,
                           const std::vector<int>& neg_grade_dist,
                           const OrdinalContrastiveParams& params);

// InfoNCE against class prototypes: positive is prototypes[label].
double prototype_contrastive(const std::vector<double>& feature,
                             const std::vector<std::vector<double>>& prototypes, int label,
                             double tau);

// Soft class targets for weakly-augmented features: transport to the
// prototypes under cost 1 - cosine, normalize each plan row, sharpen with
// tau_scale and softmax. Rows of the result sum to 1. The column marginal
// defaults to uniform; passing one (e.g. the model's own batch-mean class
// probabilities) avoids forcing mass into classes the batch does not hold.
struct TransportTargets {
  Tensor soft_labels;  // [n, K]
  TransportPlan plan;
};
TransportTargets transport_soft_labels(const std::vector<std::vector<double>>& weak_features,
                                       const std::vector<std::vector<double>>& prototypes,
                                       double epsilon, int max_iters, double tol,
                                       double tau_scale,
                                       const std::vector<double>* class_marginal = nullptr);

// Mean L1 distance between the transport targets and softmax(strong_logits).
// The targets act as a fixed teacher; gradients belong to the strong branch.
double transport_consistency(const std::vector<std::vector<double>>& weak_features,
                             const std::vector<std::vector<double>>& prototypes,
                             const std::vector<std::vector<double>>& strong_logits,
                             double epsilon, int max_iters, double tol, double tau_scale);

// Disagreement between two probability vectors: all entries of the outer
// product minus its trace, i.e. 1 - p_w . p_s. In [0, 1].
double probability_agreement_loss(const std::vector<double>& p_weak,
                                  const std::vector<double>& p_strong);

struct MixupResult {
  std::vector<double> x;
  std::vector<double> y;
  double lambda = 1.0;
};
MixupResult mixup_with_lambda(const std::vector<double>& x_i, const std::vector<double>& y_i,
                              const std::vector<double>& x_j, const std::vector<double>& y_j,
                              double lambda);
MixupResult mixup(const std::vector<double>& x_i, const std::vector<double>& y_i,
                  const std::vector<double>& x_j, const std::vector<double>& y_j, double alpha,
                  double beta, Rng& rng);

// terms: {ce, proto_align, inter, intra, mix}; weights must be nonnegative.
double total_loss(const std::vector<double>& terms, const LossWeights& weights);

// --- graph builders --------------------------------------------------------

struct LossGraph {
  Graph graph;
  NodeId loss = -1;
};

// inputs: "p" [K] (diff); "y" [K].
LossGraph make_cross_entropy_probs_graph(std::size_t classes);

// inputs: "logits" [B,K] (diff); "targets" [B,K]. Mean CE over the batch.
LossGraph make_cross_entropy_logits_graph(std::size_t batch, std::size_t classes);

// Shared form of the contrastive losses. inputs: "anchor" [d] (diff),
// "members" [m+1,d] (diff; row 0 = positive), "margins" [m+1], "inv_tau" [].
// Feature inputs must be pre-normalized; gradients are tangent to that
// normalization being handled by the caller.
LossGraph make_margin_contrastive_graph(std::size_t negatives, std::size_t dim);

// inputs: "strong_logits" [n,K] (diff); "soft_labels" [n,K].
LossGraph make_transport_consistency_graph(std::size_t batch, std::size_t classes);

// inputs: "p_weak" [K] (diff), "p_strong" [K] (diff). Probability-space form.
LossGraph make_agreement_probs_graph(std::size_t classes);

// inputs: "weak_logits" [K] (diff), "strong_logits" [K] (diff).
LossGraph make_agreement_logits_graph(std::size_t classes);

// inputs: "terms" [5] (diff); "weights" [5] (first weight fixed to 1 by the
// caller when binding).
LossGraph make_weighted_total_graph();

// Everything of one adaptation step fused into a single graph for
// end-to-end derivative checks. Inputs:
//   "ce_logits" [B,K], "ce_targets" [B,K],
//   "anchor" [d], "members" [K,d], "margins" [K], "inv_tau" [],
//   "strong_logits" [B,K], "soft_labels" [B,K],
//   "agree_weak" [K], "agree_strong" [K],
//   "mix_logits" [B,K], "mix_targets" [B,K],
//   "weights" [5]
LossGraph make_total_objective_graph(std::size_t batch, std::size_t classes, std::size_t dim);

// L2-normalize in place; returns the original norm. Zero norm is rejected.
double l2_normalize(std::vector<double>& v);

}  // namespace gradapt
