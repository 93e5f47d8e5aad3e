#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gradapt/banks.hpp"
#include "gradapt/rng.hpp"

// Pseudo-label state machine. Candidates are the unlabeled samples least
// similar to the anchor in the feature-bank space; acceptance requires the
// raw confidence gate and, when the mix check is on, that a 0.5/0.5 feature
// blend with a trusted same-label sample classifies consistently. Accepted
// entries are re-checked the same way on later passes and revoked when the
// blend disagrees. Oracle-labeled samples are never revoked.

namespace gradapt {

enum class Provenance { Oracle, Pseudo };

struct PoolEntry {
  int id = -1;
  int label = -1;
  Provenance provenance = Provenance::Oracle;
};

struct PseudoThresholds {
  double phi_a = 0.95;   // raw confidence gate
  double phi_b = 0.80;   // blended confidence gate
  int top_k = 5;         // candidate count
};

struct PseudoSwitches {
  bool add = true;        // accept new pseudo labels
  bool mix_check = true;  // gate acceptance and re-checks through the blend
  bool revoke = true;     // drop pseudo labels that fail a re-check
};

struct PseudoEvent {
  int epoch = 0;
  std::string kind;  // add | revoke_mark | recheck_ok | skip_no_partner
  int id = -1;
  int label = -1;
  double confidence = 0.0;      // raw max probability
  double mix_confidence = 0.0;  // blended max probability (when computed)
  double mix_lambda = 0.0;      // blend weight actually used
  int true_label = -1;          // audit only; never feeds a decision
};

struct PseudoState {
  std::vector<PoolEntry> pool;             // S: oracle + accepted pseudo
  std::vector<std::pair<int, int>> d_add;  // pending (id, pseudo label)
  std::set<int> d_rev;                     // pending revocations
  std::vector<char> is_pseudo;             // accepted pseudo member of S, by id
  std::vector<char> pending_add;           // queued in d_add, by id
  PseudoThresholds thresholds;

  void init(std::size_t n_target, const std::vector<int>& oracle_ids,
            const std::vector<int>& oracle_labels);
  std::size_t oracle_count() const;
  std::size_t pseudo_count() const;
};

// Model access used by the state machine; kept as hooks so the machinery is
// testable without a trained network.
struct PseudoHooks {
  std::function<std::vector<double>(int id)> feature;
  std::function<std::vector<double>(const std::vector<double>&)> classify_feature;
  std::function<int(int id)> true_label;  // audit logging only
};

// k least-similar eligible ids by cosine against the feature bank, sorted
// ascending by similarity (ties to the lower id). Eligible means: not
// oracle-labeled, not an accepted pseudo member, not pending in d_add.
std::vector<int> candidates(const PseudoState& state, const FeatureBank& bank,
                            const std::vector<char>& is_oracle_labeled, int anchor_id,
                            int top_k);

// One pass for the pool entry drawn this iteration. Mutates d_add/d_rev and
// appends audit events.
void spmis_step(PseudoState& state, const FeatureBank& bank,
                const std::vector<char>& is_oracle_labeled, const PoolEntry& drawn,
                const PseudoHooks& hooks, const PseudoSwitches& switches, Rng& rng, int epoch,
                std::vector<PseudoEvent>& events);

// Epoch-boundary reconciliation: S <- S \ d_rev + d_add, then clear both.
// Checks the state invariants and throws on violation.
void reconcile(PseudoState& state, int epoch, std::vector<PseudoEvent>& events);

}  // namespace gradapt
