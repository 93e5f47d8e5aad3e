#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "gradapt/rng.hpp"
#include "gradapt/synth.hpp"
#include "gradapt/tensor.hpp"

// Active selection: neighborhood-averaged local representations, the kernel
// two-sample distance between the full target set and the labeled subset,
// and the greedy budgeted pick that shrinks it. Deterministic throughout;
// ties always break toward the lowest sample id.

namespace gradapt {

struct KernelSpec {
  enum class Kind { Rbf, Linear };
  Kind kind = Kind::Rbf;
  double bandwidth = 0.0;  // <= 0 requests the median heuristic
};

struct LocalRepr {
  std::vector<double> v;
  int owner = -1;
  std::vector<int> neighbors;  // owner first, then by descending cosine
};

// Probability-reweighted neighborhood average: mean over the k_nn cosine
// neighbors j of h_j * (p_j W) + h_j, with W rows acting as class
// prototypes. Neighbors come from the full target set; self counts as its
// own first neighbor.
std::vector<LocalRepr> local_representations(const std::vector<std::vector<double>>& features,
                                             const std::vector<std::vector<double>>& probs,
                                             const Tensor& classifier_weight, std::size_t k_nn);

LocalRepr local_representation(int id, const std::vector<std::vector<double>>& features,
                               const std::vector<std::vector<double>>& probs,
                               const Tensor& classifier_weight, std::size_t k_nn);

// Median of pairwise Euclidean distances; the rbf bandwidth default.
double median_pairwise_distance(const std::vector<LocalRepr>& lrs);

// Returns a copy of `spec` with an explicit bandwidth filled in.
KernelSpec resolve_kernel(const KernelSpec& spec, const std::vector<LocalRepr>& lrs);

// Biased two-sample estimate: mean k(A,A) + mean k(B,B) - 2 mean k(A,B).
// Kernel bandwidth must already be explicit for rbf.
double mmd_squared(const std::vector<const LocalRepr*>& a,
                   const std::vector<const LocalRepr*>& b, const KernelSpec& kernel);
double mmd_squared(const std::vector<LocalRepr>& a, const std::vector<LocalRepr>& b,
                   const KernelSpec& kernel);

// Greedy subset growth: each step picks the unlabeled candidate whose
// addition minimizes MMD^2(all, labeled+picked+candidate). Incremental
// kernel sums make each step O(n); the argmin scan runs in ascending id
// order with strict comparison, so equal values fall to the lowest id.
std::vector<int> greedy_select(const std::vector<LocalRepr>& all_lrs,
                               const std::vector<int>& labeled_ids, std::size_t budget,
                               const KernelSpec& kernel);

// Oracle-labeled pool bookkeeping for one target domain.
struct DatasetPartition {
  std::size_t n_target = 0;
  std::vector<int> labeled_ids;  // in labeling order
  std::vector<int> labels;       // parallel to labeled_ids
  std::vector<char> is_labeled;

  void init(std::size_t n) {
    n_target = n;
    labeled_ids.clear();
    labels.clear();
    is_labeled.assign(n, 0);
  }
  std::vector<int> unlabeled_ids() const;
};

struct SelectionRound {
  int round = 0;
  std::vector<int> selected;
  double mmd_before = std::numeric_limits<double>::quiet_NaN();
  double mmd_after = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

// One labeling round: pick via greedy matching, fetch oracle labels, fold
// the picks into the partition.
SelectionRound run_round(DatasetPartition& partition, const std::vector<LocalRepr>& lrs,
                         const KernelSpec& kernel, std::size_t budget, LabelOracle& oracle,
                         int round_index);

// Uniform-random baseline under the same bookkeeping.
SelectionRound run_round_random(DatasetPartition& partition, std::size_t budget,
                                LabelOracle& oracle, Rng& rng, int round_index);

}  // namespace gradapt
