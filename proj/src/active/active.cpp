#include "gradapt/active.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gradapt/kernels.hpp"

namespace gradapt {

namespace {

double kernel_value(const KernelSpec& k, const double* a, const double* b, std::size_t d) {
  if (k.kind == KernelSpec::Kind::Linear) return kern::dot(a, b, d);
  const double sq = kern::squared_distance(a, b, d);
  return std::exp(-sq / (2.0 * k.bandwidth * k.bandwidth));
}

}  // namespace

std::vector<LocalRepr> local_representations(const std::vector<std::vector<double>>& features,
                                             const std::vector<std::vector<double>>& probs,
                                             const Tensor& classifier_weight, std::size_t k_nn) {
  const std::size_t n = features.size();
  if (n == 0) throw std::invalid_argument("local_representations: empty feature set");
  if (k_nn < 1 || k_nn > n) {
    throw std::invalid_argument("local_representations: k_nn outside [1, n]");
  }
  if (probs.size() != n) throw std::invalid_argument("local_representations: probs size mismatch");
  const std::size_t d = features[0].size();
  const std::size_t classes = classifier_weight.shape[0];

  // unit features once; cosine similarity becomes a plain dot product
  std::vector<std::vector<double>> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    unit[i] = features[i];
    const double norm = kern::norm2(unit[i].data(), d);
    if (norm == 0.0) throw std::invalid_argument("local_representations: zero-norm feature");
    kern::scale(unit[i].data(), 1.0 / norm, d);
  }

  // per-sample reweighted feature: h * (p W) + h
  std::vector<std::vector<double>> contribution(n, std::vector<double>(d));
  std::vector<double> pw(d);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(pw.begin(), pw.end(), 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
      kern::axpy(probs[i][c], classifier_weight.values.data() + c * d, pw.data(), d);
    }
    for (std::size_t t = 0; t < d; ++t) {
      contribution[i][t] = features[i][t] * pw[t] + features[i][t];
    }
  }

  std::vector<LocalRepr> out(n);
  std::vector<std::pair<double, int>> sims(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sims[j] = {kern::dot(unit[i].data(), unit[j].data(), d), static_cast<int>(j)};
    }
    // self first, then best similarity, id ascending on ties
    sims[i].first = 2.0;
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k_nn), sims.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    LocalRepr& lr = out[i];
    lr.owner = static_cast<int>(i);
    lr.v.assign(d, 0.0);
    lr.neighbors.reserve(k_nn);
    for (std::size_t r = 0; r < k_nn; ++r) {
      const int j = sims[r].second;
      lr.neighbors.push_back(j);
      kern::axpy(1.0 / static_cast<double>(k_nn), contribution[static_cast<std::size_t>(j)].data(),
                 lr.v.data(), d);
    }
  }
  return out;
}

LocalRepr local_representation(int id, const std::vector<std::vector<double>>& features,
                               const std::vector<std::vector<double>>& probs,
                               const Tensor& classifier_weight, std::size_t k_nn) {
  const auto all = local_representations(features, probs, classifier_weight, k_nn);
  if (id < 0 || static_cast<std::size_t>(id) >= all.size()) {
    throw std::out_of_range("local_representation: bad id");
  }
  return all[static_cast<std::size_t>(id)];
}

double median_pairwise_distance(const std::vector<LocalRepr>& lrs) {
  const std::size_t n = lrs.size();
  if (n < 2) return 1.0;
  const std::size_t d = lrs[0].v.size();
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dists.push_back(std::sqrt(kern::squared_distance(lrs[i].v.data(), lrs[j].v.data(), d)));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  return dists[mid];
}

KernelSpec resolve_kernel(const KernelSpec& spec, const std::vector<LocalRepr>& lrs) {
  KernelSpec out = spec;
  if (out.kind == KernelSpec::Kind::Rbf && out.bandwidth <= 0.0) {
    const double med = median_pairwise_distance(lrs);
    out.bandwidth = med > 0.0 ? med : 1.0;
  }
  return out;
}

double mmd_squared(const std::vector<const LocalRepr*>& a,
                   const std::vector<const LocalRepr*>& b, const KernelSpec& kernel) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mmd_squared: empty set");
  const std::size_t d = a[0]->v.size();
  double s_aa = 0.0;
  for (const auto* x : a) {
    for (const auto* y : a) s_aa += kernel_value(kernel, x->v.data(), y->v.data(), d);
  }
  double s_bb = 0.0;
  for (const auto* x : b) {
    for (const auto* y : b) s_bb += kernel_value(kernel, x->v.data(), y->v.data(), d);
  }
  double s_ab = 0.0;
  for (const auto* x : a) {
    for (const auto* y : b) s_ab += kernel_value(kernel, x->v.data(), y->v.data(), d);
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return s_aa / (na * na) + s_bb / (nb * nb) - 2.0 * s_ab / (na * nb);
}

double mmd_squared(const std::vector<LocalRepr>& a, const std::vector<LocalRepr>& b,
                   const KernelSpec& kernel) {
  std::vector<const LocalRepr*> pa;
  std::vector<const LocalRepr*> pb;
  pa.reserve(a.size());
  pb.reserve(b.size());
  for (const auto& x : a) pa.push_back(&x);
  for (const auto& x : b) pb.push_back(&x);
  return mmd_squared(pa, pb, kernel);
}

std::vector<int> greedy_select(const std::vector<LocalRepr>& all_lrs,
                               const std::vector<int>& labeled_ids, std::size_t budget,
                               const KernelSpec& kernel) {
  const std::size_t n = all_lrs.size();
  if (budget == 0) return {};
  std::vector<char> taken(n, 0);
  for (int id : labeled_ids) taken[static_cast<std::size_t>(id)] = 1;
  std::size_t available = 0;
  for (char t : taken) available += t ? 0 : 1;
  if (budget > available) throw std::invalid_argument("greedy_select: budget exceeds pool");

  const KernelSpec k = resolve_kernel(kernel, all_lrs);
  const std::size_t d = all_lrs[0].v.size();

  // s_all[x] = sum_a k(a, x) over the full set; S_AA its total.
  std::vector<double> s_all(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s_all[i] += kernel_value(k, all_lrs[i].v.data(), all_lrs[i].v.data(), d);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel_value(k, all_lrs[i].v.data(), all_lrs[j].v.data(), d);
      s_all[i] += v;
      s_all[j] += v;
    }
  }
  const double s_aa = kern::sum(s_all.data(), n);
  const double nn = static_cast<double>(n);

  // running sums for the growing subset B
  double s_bb = 0.0;
  double s_ab = 0.0;
  std::vector<double> t_b(n, 0.0);  // sum_{b in B} k(x, b)
  std::vector<int> b_ids = labeled_ids;
  for (std::size_t bi = 0; bi < b_ids.size(); ++bi) {
    const auto& lb = all_lrs[static_cast<std::size_t>(b_ids[bi])];
    s_ab += s_all[static_cast<std::size_t>(b_ids[bi])];
    for (std::size_t x = 0; x < n; ++x) {
      t_b[x] += kernel_value(k, all_lrs[x].v.data(), lb.v.data(), d);
    }
  }
  for (std::size_t i = 0; i < b_ids.size(); ++i) {
    for (std::size_t j = 0; j < b_ids.size(); ++j) {
      s_bb += kernel_value(k, all_lrs[static_cast<std::size_t>(b_ids[i])].v.data(),
                           all_lrs[static_cast<std::size_t>(b_ids[j])].v.data(), d);
    }
  }

  std::vector<int> picks;
  picks.reserve(budget);
  for (std::size_t step = 0; step < budget; ++step) {
    const double m = static_cast<double>(b_ids.size() + 1);
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
      if (taken[x]) continue;
      const double self = kernel_value(k, all_lrs[x].v.data(), all_lrs[x].v.data(), d);
      const double cand_bb = s_bb + 2.0 * t_b[x] + self;
      const double cand_ab = s_ab + s_all[x];
      const double val = s_aa / (nn * nn) + cand_bb / (m * m) - 2.0 * cand_ab / (nn * m);
      if (val < best_val) {
        best_val = val;
        best = static_cast<int>(x);
      }
    }
    const auto bx = static_cast<std::size_t>(best);
    taken[bx] = 1;
    picks.push_back(best);
    s_bb += 2.0 * t_b[bx] + kernel_value(k, all_lrs[bx].v.data(), all_lrs[bx].v.data(), d);
    s_ab += s_all[bx];
    for (std::size_t x = 0; x < n; ++x) {
      t_b[x] += kernel_value(k, all_lrs[x].v.data(), all_lrs[bx].v.data(), d);
    }
    b_ids.push_back(best);
  }
  return picks;
}

std::vector<int> DatasetPartition::unlabeled_ids() const {
  std::vector<int> out;
  out.reserve(n_target - labeled_ids.size());
  for (std::size_t i = 0; i < n_target; ++i) {
    if (!is_labeled[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

void absorb_selection(DatasetPartition& partition, const std::vector<int>& selected,
                      LabelOracle& oracle) {
  for (int id : selected) {
    if (partition.is_labeled[static_cast<std::size_t>(id)]) {
      throw std::logic_error("run_round: selected an already labeled id");
    }
    partition.is_labeled[static_cast<std::size_t>(id)] = 1;
    partition.labeled_ids.push_back(id);
    partition.labels.push_back(oracle.label(id));
  }
}

}  // namespace

SelectionRound run_round(DatasetPartition& partition, const std::vector<LocalRepr>& lrs,
                         const KernelSpec& kernel, std::size_t budget, LabelOracle& oracle,
                         int round_index) {
  if (budget > partition.n_target - partition.labeled_ids.size()) {
    throw std::invalid_argument("run_round: budget exceeds remaining unlabeled pool");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec k = resolve_kernel(kernel, lrs);

  SelectionRound log;
  log.round = round_index;
  auto subset = [&](const std::vector<int>& ids) {
    std::vector<const LocalRepr*> ptrs;
    ptrs.reserve(ids.size());
    for (int id : ids) ptrs.push_back(&lrs[static_cast<std::size_t>(id)]);
    return ptrs;
  };
  std::vector<const LocalRepr*> all;
  all.reserve(lrs.size());
  for (const auto& lr : lrs) all.push_back(&lr);

  if (!partition.labeled_ids.empty()) {
    log.mmd_before = mmd_squared(all, subset(partition.labeled_ids), k);
  }
  log.selected = greedy_select(lrs, partition.labeled_ids, budget, k);
  absorb_selection(partition, log.selected, oracle);
  log.mmd_after = mmd_squared(all, subset(partition.labeled_ids), k);
  log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return log;
}

SelectionRound run_round_random(DatasetPartition& partition, std::size_t budget,
                                LabelOracle& oracle, Rng& rng, int round_index) {
  auto pool = partition.unlabeled_ids();
  if (budget > pool.size()) {
    throw std::invalid_argument("run_round_random: budget exceeds remaining unlabeled pool");
  }
  const auto t0 = std::chrono::steady_clock::now();
  SelectionRound log;
  log.round = round_index;
  rng.shuffle(pool);
  log.selected.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(budget));
  absorb_selection(partition, log.selected, oracle);
  log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return log;
}

}  // namespace gradapt
