#include "gradapt/pseudo.hpp"

#include <algorithm>
#include <stdexcept>

#include "gradapt/kernels.hpp"
#include "gradapt/losses.hpp"

namespace gradapt {

void PseudoState::init(std::size_t n_target, const std::vector<int>& oracle_ids,
                       const std::vector<int>& oracle_labels) {
  pool.clear();
  d_add.clear();
  d_rev.clear();
  is_pseudo.assign(n_target, 0);
  pending_add.assign(n_target, 0);
  for (std::size_t i = 0; i < oracle_ids.size(); ++i) {
    pool.push_back({oracle_ids[i], oracle_labels[i], Provenance::Oracle});
  }
}

std::size_t PseudoState::oracle_count() const {
  std::size_t n = 0;
  for (const auto& e : pool) n += e.provenance == Provenance::Oracle ? 1 : 0;
  return n;
}

std::size_t PseudoState::pseudo_count() const { return pool.size() - oracle_count(); }

std::vector<int> candidates(const PseudoState& state, const FeatureBank& bank,
                            const std::vector<char>& is_oracle_labeled, int anchor_id,
                            int top_k) {
  if (top_k < 1) throw std::invalid_argument("candidates: top_k must be at least 1");
  const auto& anchor = bank.entries[static_cast<std::size_t>(anchor_id)];
  const std::size_t d = anchor.size();
  const double anchor_norm = kern::norm2(anchor.data(), d);
  if (anchor_norm == 0.0) throw std::invalid_argument("candidates: anchor bank entry is zero");

  std::vector<std::pair<double, int>> scored;
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    if (is_oracle_labeled[i] || state.is_pseudo[i] || state.pending_add[i]) continue;
    const auto& e = bank.entries[i];
    const double norm = kern::norm2(e.data(), d);
    if (norm == 0.0) continue;  // never refreshed
    const double cos = kern::dot(anchor.data(), e.data(), d) / (anchor_norm * norm);
    scored.emplace_back(cos, static_cast<int>(i));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;  // least similar first
    return a.second < b.second;
  });
  std::vector<int> out;
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_k), scored.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

namespace {

int argmax(const std::vector<double>& p) {
  int best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

// Random trusted (oracle) pool member with the requested label, or -1.
int pick_partner(const PseudoState& state, int label, Rng& rng) {
  std::vector<int> matching;
  for (const auto& e : state.pool) {
    if (e.provenance == Provenance::Oracle && e.label == label) matching.push_back(e.id);
  }
  if (matching.empty()) return -1;
  return matching[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(matching.size()) - 1))];
}

}  // namespace

void spmis_step(PseudoState& state, const FeatureBank& bank,
                const std::vector<char>& is_oracle_labeled, const PoolEntry& drawn,
                const PseudoHooks& hooks, const PseudoSwitches& switches, Rng& rng, int epoch,
                std::vector<PseudoEvent>& events) {
  // Re-check an accepted pseudo member against a trusted same-label blend.
  if (drawn.provenance == Provenance::Pseudo && switches.mix_check) {
    const int partner = pick_partner(state, drawn.label, rng);
    if (partner < 0) {
      events.push_back({epoch, "skip_no_partner", drawn.id, drawn.label, 0.0, 0.0, 0.0,
                        hooks.true_label(drawn.id)});
    } else {
      const auto h_r = hooks.feature(drawn.id);
      const auto h_tl = hooks.feature(partner);
      const auto blend = mixup_with_lambda(h_r, {}, h_tl, {}, 0.5);
      const auto p_s = hooks.classify_feature(blend.x);
      const int y_s = argmax(p_s);
      if (y_s != drawn.label && switches.revoke) {
        if (is_oracle_labeled[static_cast<std::size_t>(drawn.id)]) {
          throw std::logic_error("spmis: attempted to revoke an oracle-labeled sample");
        }
        state.d_rev.insert(drawn.id);
        events.push_back({epoch, "revoke_mark", drawn.id, drawn.label,
                          p_s[static_cast<std::size_t>(y_s)],
                          p_s[static_cast<std::size_t>(y_s)], blend.lambda,
                          hooks.true_label(drawn.id)});
      } else {
        events.push_back({epoch, "recheck_ok", drawn.id, drawn.label,
                          p_s[static_cast<std::size_t>(y_s)],
                          p_s[static_cast<std::size_t>(y_s)], blend.lambda,
                          hooks.true_label(drawn.id)});
      }
    }
  }

  if (!switches.add) return;

  const auto cands = candidates(state, bank, is_oracle_labeled, drawn.id,
                                state.thresholds.top_k);
  if (cands.empty()) return;
  const int x_r = cands[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1))];

  const auto h_r = hooks.feature(x_r);
  const auto p_r = hooks.classify_feature(h_r);
  const int y_r = argmax(p_r);
  const double conf_r = p_r[static_cast<std::size_t>(y_r)];
  if (conf_r < state.thresholds.phi_a) return;

  if (switches.mix_check) {
    const int partner = pick_partner(state, y_r, rng);
    if (partner < 0) {
      events.push_back({epoch, "skip_no_partner", x_r, y_r, conf_r, 0.0, 0.0,
                        hooks.true_label(x_r)});
      return;
    }
    const auto h_tl = hooks.feature(partner);
    const auto blend = mixup_with_lambda(h_r, {}, h_tl, {}, 0.5);
    const auto p_s = hooks.classify_feature(blend.x);
    const int y_s = argmax(p_s);
    const double conf_s = p_s[static_cast<std::size_t>(y_s)];
    if (conf_s >= state.thresholds.phi_b && y_s == y_r) {
      state.d_add.emplace_back(x_r, y_r);
      state.pending_add[static_cast<std::size_t>(x_r)] = 1;
      events.push_back({epoch, "add", x_r, y_r, conf_r, conf_s, blend.lambda,
                        hooks.true_label(x_r)});
    }
  } else {
    // threshold-only acceptance
    state.d_add.emplace_back(x_r, y_r);
    state.pending_add[static_cast<std::size_t>(x_r)] = 1;
    events.push_back({epoch, "add", x_r, y_r, conf_r, 0.0, 0.0, hooks.true_label(x_r)});
  }
}

void reconcile(PseudoState& state, int epoch, std::vector<PseudoEvent>& events) {
  for (const auto& [id, label] : state.d_add) {
    (void)label;
    if (state.d_rev.count(id) != 0) {
      throw std::logic_error("spmis: d_add and d_rev overlap at reconciliation");
    }
  }
  // drop revoked pseudo members
  std::vector<PoolEntry> next;
  next.reserve(state.pool.size() + state.d_add.size());
  for (const auto& e : state.pool) {
    if (state.d_rev.count(e.id) != 0) {
      if (e.provenance == Provenance::Oracle) {
        throw std::logic_error("spmis: oracle-labeled sample in d_rev");
      }
      state.is_pseudo[static_cast<std::size_t>(e.id)] = 0;
      events.push_back({epoch, "revoke", e.id, e.label, 0.0, 0.0, 0.0, -1});
      continue;
    }
    next.push_back(e);
  }
  for (const auto& [id, label] : state.d_add) {
    next.push_back({id, label, Provenance::Pseudo});
    state.is_pseudo[static_cast<std::size_t>(id)] = 1;
    state.pending_add[static_cast<std::size_t>(id)] = 0;
  }
  state.pool = std::move(next);
  state.d_add.clear();
  state.d_rev.clear();

  std::size_t pseudo_flags = 0;
  for (char f : state.is_pseudo) pseudo_flags += f ? 1 : 0;
  if (pseudo_flags != state.pseudo_count()) {
    throw std::logic_error("spmis: pseudo flags out of sync with the pool");
  }
}

}  // namespace gradapt
