#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "gradapt/losses.hpp"
#include "gradapt/nets.hpp"

// Shared training plumbing: loss graphs cached per shape with reusable
// workspaces, and small helpers that evaluate a term and hand back the
// gradients the nets need.

namespace gradapt::detail {

struct CachedGraph {
  LossGraph lg;
  std::unique_ptr<Workspace> ws;

  explicit CachedGraph(LossGraph g) : lg(std::move(g)) {
    ws = std::make_unique<Workspace>(lg.graph);
  }
};

class GraphCache {
 public:
  CachedGraph& ce(std::size_t batch, std::size_t classes) {
    auto key = std::make_pair(batch, classes);
    auto it = ce_.find(key);
    if (it == ce_.end()) {
      it = ce_.emplace(key, std::make_unique<CachedGraph>(
                                make_cross_entropy_logits_graph(batch, classes)))
               .first;
    }
    return *it->second;
  }

  CachedGraph& margin(std::size_t negatives, std::size_t dim) {
    auto key = std::make_pair(negatives, dim);
    auto it = margin_.find(key);
    if (it == margin_.end()) {
      it = margin_
               .emplace(key, std::make_unique<CachedGraph>(
                                 make_margin_contrastive_graph(negatives, dim)))
               .first;
    }
    return *it->second;
  }

  CachedGraph& inter(std::size_t batch, std::size_t classes) {
    auto key = std::make_pair(batch, classes);
    auto it = inter_.find(key);
    if (it == inter_.end()) {
      it = inter_.emplace(key, std::make_unique<CachedGraph>(
                                   make_transport_consistency_graph(batch, classes)))
               .first;
    }
    return *it->second;
  }

  CachedGraph& agree(std::size_t classes) {
    auto it = agree_.find(classes);
    if (it == agree_.end()) {
      it = agree_.emplace(classes, std::make_unique<CachedGraph>(
                                       make_agreement_logits_graph(classes)))
               .first;
    }
    return *it->second;
  }

 private:
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<CachedGraph>> ce_;
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<CachedGraph>> margin_;
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<CachedGraph>> inter_;
  std::map<std::size_t, std::unique_ptr<CachedGraph>> agree_;
};

// Mean cross-entropy over a batch of logit rows; d_logits gets the gradient.
inline double ce_batch_term(GraphCache& cache, const std::vector<std::vector<double>>& logits,
                            const std::vector<std::vector<double>>& targets,
                            std::vector<std::vector<double>>& d_logits) {
  const std::size_t b = logits.size();
  const std::size_t k = logits[0].size();
  auto& cg = cache.ce(b, k);
  Tensor z = Tensor::zeros({b, k});
  Tensor y = Tensor::zeros({b, k});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      z.at(i, c) = logits[i][c];
      y.at(i, c) = targets[i][c];
    }
  }
  cg.ws->forward({{"logits", z}, {"targets", y}});
  cg.ws->backward(cg.lg.loss);
  const Tensor& dz = cg.ws->input_gradient("logits");
  d_logits.assign(b, std::vector<double>(k));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t c = 0; c < k; ++c) d_logits[i][c] = dz.at(i, c);
  }
  return cg.ws->value(cg.lg.loss).values[0];
}

// One anchor against a positive row and negative rows (all pre-normalized).
// Returns the loss; gradient lands in d_anchor / d_members (same layout as
// members: positive first).
inline double margin_term(GraphCache& cache, const std::vector<double>& anchor_unit,
                          const std::vector<std::vector<double>>& member_units,
                          const std::vector<double>& margins, double tau,
                          std::vector<double>& d_anchor,
                          std::vector<std::vector<double>>& d_members) {
  const std::size_t rows = member_units.size();
  const std::size_t d = anchor_unit.size();
  auto& cg = cache.margin(rows - 1, d);
  Tensor members = Tensor::zeros({rows, d});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) members.at(r, c) = member_units[r][c];
  }
  Bindings bind;
  bind["anchor"] = Tensor::vector(anchor_unit);
  bind["members"] = members;
  bind["margins"] = Tensor::vector(margins);
  bind["inv_tau"] = Tensor::scalar(1.0 / tau);
  cg.ws->forward(bind);
  cg.ws->backward(cg.lg.loss);
  d_anchor = cg.ws->input_gradient("anchor").values;
  const Tensor& dm = cg.ws->input_gradient("members");
  d_members.assign(rows, std::vector<double>(d));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) d_members[r][c] = dm.at(r, c);
  }
  return cg.ws->value(cg.lg.loss).values[0];
}

}  // namespace gradapt::detail
