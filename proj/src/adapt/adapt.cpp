#include "gradapt/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "../trainer_util.hpp"
#include "gradapt/kernels.hpp"

namespace gradapt {

std::vector<double> augment_weak(const std::vector<double>& x, double sigma, Rng& rng) {
  std::vector<double> out = x;
  for (auto& v : out) v += sigma * rng.normal();
  return out;
}

std::vector<double> augment_strong(const std::vector<double>& x, double sigma, double drop_rate,
                                   Rng& rng) {
  std::vector<double> out = x;
  for (auto& v : out) v += sigma * rng.normal();
  for (auto& v : out) {
    if (rng.uniform() < drop_rate) v = 0.0;
  }
  return out;
}

Evaluation evaluate_model(const EncoderParams& enc, const ClassifierParams& cls,
                          const Dataset& target) {
  Evaluation ev;
  const std::size_t n = target.x.size();
  const std::size_t k = cls.weight.shape[0];
  ev.preds.resize(n);
  ev.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev.scores[i] = classify(cls, encode(enc, target.x[i]));
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (ev.scores[i][c] > ev.scores[i][arg]) arg = c;
    }
    ev.preds[i] = static_cast<int>(arg);
  }
  ev.confusion = confusion(ev.preds, target.labels, k);
  const auto s = summary(ev.confusion);
  ev.accuracy = s.accuracy;
  ev.macro_f1 = s.macro_f1;
  ev.kappa = kappa(ev.confusion, KappaWeighting::None).value;
  ev.qwk = kappa(ev.confusion, KappaWeighting::Quadratic).value;
  return ev;
}

namespace {

std::vector<double> one_hot(int label, std::size_t classes) {
  std::vector<double> y(classes, 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

struct Snapshot {
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> p;
  std::vector<std::vector<double>> unit;

  void refresh_all(const EncoderParams& enc, const ClassifierParams& cls,
                   const Dataset& target) {
    const std::size_t n = target.x.size();
    h.resize(n);
    p.resize(n);
    unit.resize(n);
    for (std::size_t i = 0; i < n; ++i) refresh_one(enc, cls, target, static_cast<int>(i));
  }

  void refresh_one(const EncoderParams& enc, const ClassifierParams& cls, const Dataset& target,
                   int id) {
    const auto idx = static_cast<std::size_t>(id);
    h[idx] = encode(enc, target.x[idx]);
    p[idx] = classify(cls, h[idx]);
    unit[idx] = h[idx];
    const double norm = kern::norm2(unit[idx].data(), unit[idx].size());
    if (norm > 0.0) kern::scale(unit[idx].data(), 1.0 / norm, unit[idx].size());
  }
};

// Local representation of one sample against the snapshot: k_nn cosine
// neighbors over the full set (self first), probability-reweighted average.
std::vector<double> snapshot_local_repr(const Snapshot& snap, const Tensor& w, std::size_t k_nn,
                                        int id) {
  const std::size_t n = snap.h.size();
  const std::size_t d = snap.h[0].size();
  const std::size_t classes = w.shape[0];
  const auto idx = static_cast<std::size_t>(id);

  std::vector<std::pair<double, int>> sims(n);
  for (std::size_t j = 0; j < n; ++j) {
    sims[j] = {kern::dot(snap.unit[idx].data(), snap.unit[j].data(), d), static_cast<int>(j)};
  }
  sims[idx].first = 2.0;  // self first
  std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k_nn), sims.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<double> lr(d, 0.0);
  std::vector<double> pw(d);
  for (std::size_t r = 0; r < k_nn; ++r) {
    const auto j = static_cast<std::size_t>(sims[r].second);
    std::fill(pw.begin(), pw.end(), 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
      kern::axpy(snap.p[j][c], w.values.data() + c * d, pw.data(), d);
    }
    for (std::size_t t = 0; t < d; ++t) {
      lr[t] += (snap.h[j][t] * pw[t] + snap.h[j][t]) / static_cast<double>(k_nn);
    }
  }
  return lr;
}

}  // namespace

AdaptResult adapt(const EncoderParams& encoder0, const ClassifierParams& classifier0,
                  const GeneratorParams& generator, const Dataset& target, LabelOracle& oracle,
                  const AdaptConfig& cfg, const NetConfig& netcfg, std::uint64_t seed) {
  if (cfg.epochs < 1) throw std::invalid_argument("adapt: epochs must be >= 1");
  if (cfg.batch_labeled < 1 || cfg.batch_unlabeled < 1) {
    throw std::invalid_argument("adapt: batch sizes must be >= 1");
  }
  const std::size_t n = target.x.size();
  const std::size_t classes = netcfg.classes;
  const std::size_t d = netcfg.feature_dim;

  AdaptResult res;
  res.encoder = encoder0;
  res.classifier = classifier0;
  res.classifier.frozen = false;

  auto params = named_parameters(res.encoder, "encoder");
  const auto cls_params = named_parameters(res.classifier, "classifier");
  params.insert(params.end(), cls_params.begin(), cls_params.end());
  auto opt = make_adadelta(params, cfg.optimizer);

  res.partition.init(n);
  PseudoState pseudo;
  pseudo.init(n, {}, {});
  pseudo.thresholds = cfg.thresholds;
  auto proto_bank = make_prototype_bank(classes, d, cfg.prototype_ema);
  auto feature_bank = make_feature_bank(n, d, cfg.feature_bank_ema);

  Rng select_rng = Rng::stream(seed, "active.select");
  Rng shuffle_s = Rng::stream(seed, "adapt.shuffle_s");
  Rng shuffle_tu = Rng::stream(seed, "adapt.shuffle_tu");
  Rng augment_rng = Rng::stream(seed, "adapt.augment");
  Rng mix_rng = Rng::stream(seed, "adapt.mixup");
  Rng proto_rng = Rng::stream(seed, "adapt.proto_noise");
  Rng spmis_rng = Rng::stream(seed, "adapt.spmis");

  Snapshot snap;
  snap.refresh_all(res.encoder, res.classifier, target);

  const std::size_t rounds = cfg.active_round_epochs.size();
  const std::size_t budget_per_round = rounds > 0 ? cfg.budget_total / rounds : 0;

  detail::GraphCache cache;
  MlpGrads enc_grads = make_grads(res.encoder.mlp);
  Tensor d_w = Tensor::zeros(res.classifier.weight.shape);
  Tensor d_b = Tensor::zeros(res.classifier.bias.shape);

  PseudoHooks hooks;
  hooks.feature = [&](int id) {
    return encode(res.encoder, target.x[static_cast<std::size_t>(id)]);
  };
  hooks.classify_feature = [&](const std::vector<double>& h) {
    return classify(res.classifier, h);
  };
  hooks.true_label = [&](int id) {  // audit log only
    return target.labels[static_cast<std::size_t>(id)];
  };

  const PseudoSwitches pseudo_switches{cfg.ablation.pseudo_add, cfg.ablation.pseudo_mix_check,
                                       cfg.ablation.pseudo_revoke};

  int rounds_done = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // ---- stage two: labeling round -------------------------------------
    const bool round_now =
        std::find(cfg.active_round_epochs.begin(), cfg.active_round_epochs.end(), epoch) !=
        cfg.active_round_epochs.end();
    if (round_now && budget_per_round > 0) {
      snap.refresh_all(res.encoder, res.classifier, target);
      const auto lrs =
          local_representations(snap.h, snap.p, res.classifier.weight, cfg.k_nn);
      SelectionRound round;
      if (cfg.matching_selection) {
        round = run_round(res.partition, lrs, cfg.kernel, budget_per_round, oracle, rounds_done);
      } else {
        round = run_round_random(res.partition, budget_per_round, oracle, select_rng,
                                 rounds_done);
      }
      ++rounds_done;
      for (std::size_t i = res.partition.labeled_ids.size() - round.selected.size();
           i < res.partition.labeled_ids.size(); ++i) {
        pseudo.pool.push_back(
            {res.partition.labeled_ids[i], res.partition.labels[i], Provenance::Oracle});
      }
      refresh_all(feature_bank, lrs);
      res.selection_rounds.push_back(round);
    }

    if (pseudo.pool.empty()) {
      throw std::runtime_error("adapt: no labeled samples; schedule a labeling round first");
    }

    // ---- stage three: one epoch over the unlabeled pool ----------------
    const auto pool_snapshot = pseudo.pool;  // S fixed for the epoch
    std::vector<std::size_t> s_order(pool_snapshot.size());
    std::iota(s_order.begin(), s_order.end(), 0);
    shuffle_s.shuffle(s_order);

    auto tu_ids = res.partition.unlabeled_ids();
    shuffle_tu.shuffle(tu_ids);
    const std::size_t iterations =
        std::max<std::size_t>(1, (tu_ids.size() + cfg.batch_unlabeled - 1) / cfg.batch_unlabeled);

    const bool pseudo_active = cfg.ablation.pseudo_labels && epoch >= cfg.pseudo_start_epoch;

    EpochMetrics em;
    em.epoch = epoch;
    std::size_t s_cursor = 0;

    for (std::size_t it = 0; it < iterations; ++it) {
      // prototypes from generator batches, EMA-smoothed
      std::map<int, std::vector<double>> class_means;
      for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> mean(d, 0.0);
        std::vector<double> noise(netcfg.noise_dim);
        for (std::size_t s = 0; s < cfg.prototype_batch; ++s) {
          for (auto& v : noise) v = proto_rng.normal();
          const auto f = generate(generator, noise, static_cast<int>(c));
          kern::axpy(1.0 / static_cast<double>(cfg.prototype_batch), f.data(), mean.data(), d);
        }
        class_means[static_cast<int>(c)] = std::move(mean);
      }
      update_prototypes(proto_bank, class_means);
      std::vector<std::vector<double>> protos_unit(classes);
      for (std::size_t c = 0; c < classes; ++c) {
        protos_unit[c] = proto_bank.prototypes[c];
        const double norm = kern::norm2(protos_unit[c].data(), d);
        if (norm > 0.0) kern::scale(protos_unit[c].data(), 1.0 / norm, d);
      }

      // labeled batch: cycle the shuffled pool snapshot
      const std::size_t bl = std::min(cfg.batch_labeled,
                                      std::max<std::size_t>(1, pool_snapshot.size()));
      std::vector<PoolEntry> batch_l(bl);
      for (std::size_t i = 0; i < bl; ++i) {
        batch_l[i] = pool_snapshot[s_order[s_cursor % s_order.size()]];
        ++s_cursor;
      }

      std::vector<MlpCache> caches_l(bl);
      std::vector<std::vector<double>> h_l(bl);
      std::vector<std::vector<double>> logits_l(bl);
      std::vector<std::vector<double>> targets_l(bl);
      std::vector<NormalizedFeature> units_l(bl);
      for (std::size_t i = 0; i < bl; ++i) {
        const auto& x = target.x[static_cast<std::size_t>(batch_l[i].id)];
        h_l[i] = encode(res.encoder, x, &caches_l[i]);
        logits_l[i] = classify_logits(res.classifier, h_l[i]);
        targets_l[i] = one_hot(batch_l[i].label, classes);
        units_l[i] = normalize_feature(h_l[i]);
      }

      std::vector<std::vector<double>> d_logits_l;
      const double ce = detail::ce_batch_term(cache, logits_l, targets_l, d_logits_l);

      // prototype alignment on normalized features; bank rows are fixed
      std::vector<std::vector<double>> d_unit_l(bl, std::vector<double>(d, 0.0));
      double proto_loss = 0.0;
      if (cfg.ablation.proto_align && proto_bank.initialized) {
        std::vector<double> d_anchor;
        std::vector<std::vector<double>> d_members;
        for (std::size_t i = 0; i < bl; ++i) {
          std::vector<std::vector<double>> members;
          members.push_back(protos_unit[static_cast<std::size_t>(batch_l[i].label)]);
          for (std::size_t c = 0; c < classes; ++c) {
            if (c != static_cast<std::size_t>(batch_l[i].label)) members.push_back(protos_unit[c]);
          }
          const std::vector<double> margins(classes, 0.0);
          proto_loss += detail::margin_term(cache, units_l[i].unit, members, margins,
                                            cfg.proto_tau, d_anchor, d_members);
          kern::axpy(1.0 / static_cast<double>(bl), d_anchor.data(), d_unit_l[i].data(), d);
        }
        proto_loss /= static_cast<double>(bl);
      }

      // unlabeled batch with two augmented views
      const std::size_t off = it * cfg.batch_unlabeled;
      const std::size_t bu = off < tu_ids.size()
                                 ? std::min(cfg.batch_unlabeled, tu_ids.size() - off)
                                 : 0;
      std::vector<int> batch_u(bu);
      std::vector<MlpCache> caches_w(bu);
      std::vector<MlpCache> caches_s(bu);
      std::vector<std::vector<double>> h_w(bu);
      std::vector<std::vector<double>> h_s(bu);
      std::vector<std::vector<double>> logits_w(bu);
      std::vector<std::vector<double>> logits_s(bu);
      for (std::size_t i = 0; i < bu; ++i) {
        batch_u[i] = tu_ids[off + i];
        const auto& x = target.x[static_cast<std::size_t>(batch_u[i])];
        const auto xw = augment_weak(x, cfg.sigma_weak, augment_rng);
        const auto xs = augment_strong(x, cfg.sigma_strong, cfg.drop_rate, augment_rng);
        h_w[i] = encode(res.encoder, xw, &caches_w[i]);
        h_s[i] = encode(res.encoder, xs, &caches_s[i]);
        logits_w[i] = classify_logits(res.classifier, h_w[i]);
        logits_s[i] = classify_logits(res.classifier, h_s[i]);
      }

      double inter_loss = 0.0;
      std::vector<std::vector<double>> d_logits_s(bu, std::vector<double>(classes, 0.0));
      std::vector<std::vector<double>> d_logits_w(bu, std::vector<double>(classes, 0.0));
      if (cfg.ablation.inter_consistency && bu > 0 && proto_bank.initialized) {
        std::vector<double> marginal(classes, 0.0);
        if (cfg.estimated_marginal) {
          std::vector<double> probs(classes);
          for (std::size_t i = 0; i < bu; ++i) {
            const double m = kern::max_value(logits_w[i].data(), classes);
            double z = 0.0;
            for (std::size_t c = 0; c < classes; ++c) {
              probs[c] = std::exp(logits_w[i][c] - m);
              z += probs[c];
            }
            for (std::size_t c = 0; c < classes; ++c) {
              marginal[c] += probs[c] / (z * static_cast<double>(bu));
            }
          }
        }
        const auto targets = transport_soft_labels(
            h_w, proto_bank.prototypes, cfg.ot_epsilon, cfg.ot_max_iters, cfg.ot_tol,
            cfg.tau_scale, cfg.estimated_marginal ? &marginal : nullptr);
        auto& cg = cache.inter(bu, classes);
        Tensor z = Tensor::zeros({bu, classes});
        for (std::size_t i = 0; i < bu; ++i) {
          for (std::size_t c = 0; c < classes; ++c) z.at(i, c) = logits_s[i][c];
        }
        cg.ws->forward({{"strong_logits", z}, {"soft_labels", targets.soft_labels}});
        cg.ws->backward(cg.lg.loss);
        inter_loss = cg.ws->value(cg.lg.loss).values[0];
        const Tensor& dz = cg.ws->input_gradient("strong_logits");
        for (std::size_t i = 0; i < bu; ++i) {
          for (std::size_t c = 0; c < classes; ++c) {
            d_logits_s[i][c] += cfg.weights.inter * dz.at(i, c);
          }
        }
      }

      double intra_loss = 0.0;
      if (cfg.ablation.intra_consistency && bu > 0) {
        auto& ag = cache.agree(classes);
        for (std::size_t i = 0; i < bu; ++i) {
          ag.ws->forward({{"weak_logits", Tensor::vector(logits_w[i])},
                          {"strong_logits", Tensor::vector(logits_s[i])}});
          ag.ws->backward(ag.lg.loss);
          intra_loss += ag.ws->value(ag.lg.loss).values[0];
          const auto& dw_g = ag.ws->input_gradient("weak_logits").values;
          const auto& ds_g = ag.ws->input_gradient("strong_logits").values;
          for (std::size_t c = 0; c < classes; ++c) {
            d_logits_w[i][c] += cfg.weights.intra * dw_g[c] / static_cast<double>(bu);
            d_logits_s[i][c] += cfg.weights.intra * ds_g[c] / static_cast<double>(bu);
          }
        }
        intra_loss /= static_cast<double>(bu);
      }

      // mixup cross-entropy on the labeled batch. Blends live in feature
      // space, the same space the pseudo-label checker probes with its
      // half-half blends, so this term trains exactly the response that
      // check relies on.
      double mix_loss = 0.0;
      std::vector<std::size_t> mix_partner(bl, 0);
      std::vector<double> mix_lambda(bl, 1.0);
      std::vector<std::vector<double>> h_m;
      std::vector<std::vector<double>> d_logits_m;
      if (cfg.ablation.mixup && bl >= 2) {
        h_m.resize(bl);
        std::vector<std::vector<double>> logits_m(bl);
        std::vector<std::vector<double>> targets_m(bl);
        for (std::size_t i = 0; i < bl; ++i) {
          const auto j = static_cast<std::size_t>(
              mix_rng.uniform_int(0, static_cast<std::int64_t>(bl) - 1));
          const auto mixed = mixup(h_l[i], targets_l[i], h_l[j], targets_l[j], cfg.mix_alpha,
                                   cfg.mix_beta, mix_rng);
          mix_partner[i] = j;
          mix_lambda[i] = mixed.lambda;
          h_m[i] = mixed.x;
          logits_m[i] = classify_logits(res.classifier, h_m[i]);
          targets_m[i] = mixed.y;
        }
        mix_loss = detail::ce_batch_term(cache, logits_m, targets_m, d_logits_m);
      }

      // ---- backward assembly -------------------------------------------
      zero(enc_grads);
      std::fill(d_w.values.begin(), d_w.values.end(), 0.0);
      std::fill(d_b.values.begin(), d_b.values.end(), 0.0);

      for (std::size_t i = 0; i < bl; ++i) {
        auto dh = classifier_backward(res.classifier, h_l[i], d_logits_l[i], d_w, d_b);
        if (cfg.ablation.proto_align && proto_bank.initialized) {
          std::vector<double> scaled = d_unit_l[i];
          kern::scale(scaled.data(), cfg.weights.proto_align, d);
          const auto dh_proto = normalize_backward(units_l[i], scaled);
          kern::axpy(1.0, dh_proto.data(), dh.data(), d);
        }
        mlp_backward(res.encoder.mlp, caches_l[i], dh, enc_grads);
      }
      for (std::size_t i = 0; i < bu; ++i) {
        bool any_w = false;
        bool any_s = false;
        for (std::size_t c = 0; c < classes; ++c) {
          any_w = any_w || d_logits_w[i][c] != 0.0;
          any_s = any_s || d_logits_s[i][c] != 0.0;
        }
        if (any_w) {
          const auto dh = classifier_backward(res.classifier, h_w[i], d_logits_w[i], d_w, d_b);
          mlp_backward(res.encoder.mlp, caches_w[i], dh, enc_grads);
        }
        if (any_s) {
          const auto dh = classifier_backward(res.classifier, h_s[i], d_logits_s[i], d_w, d_b);
          mlp_backward(res.encoder.mlp, caches_s[i], dh, enc_grads);
        }
      }
      if (cfg.ablation.mixup && !d_logits_m.empty()) {
        for (std::size_t i = 0; i < d_logits_m.size(); ++i) {
          std::vector<double> scaled = d_logits_m[i];
          kern::scale(scaled.data(), cfg.weights.mix, classes);
          const auto dh_mix = classifier_backward(res.classifier, h_m[i], scaled, d_w, d_b);
          // chain through the blend into both endpoint features
          std::vector<double> dh_i = dh_mix;
          kern::scale(dh_i.data(), mix_lambda[i], d);
          mlp_backward(res.encoder.mlp, caches_l[i], dh_i, enc_grads);
          std::vector<double> dh_j = dh_mix;
          kern::scale(dh_j.data(), 1.0 - mix_lambda[i], d);
          mlp_backward(res.encoder.mlp, caches_l[mix_partner[i]], dh_j, enc_grads);
        }
      }

      std::vector<Tensor> grads;
      for (auto& l : enc_grads.layers) {
        grads.push_back(l.weight);
        grads.push_back(l.bias);
      }
      grads.push_back(d_w);
      grads.push_back(d_b);
      adadelta_step(params, grads, opt);

      // ---- memory-bank refresh for the unlabeled batch -------------------
      for (std::size_t i = 0; i < bu; ++i) {
        snap.refresh_one(res.encoder, res.classifier, target, batch_u[i]);
      }
      for (std::size_t i = 0; i < bu; ++i) {
        const auto lr = snapshot_local_repr(snap, res.classifier.weight, cfg.k_nn, batch_u[i]);
        ema_update(feature_bank, batch_u[i], lr);
      }

      // ---- pseudo-label machine ------------------------------------------
      if (pseudo_active) {
        const std::vector<char> is_oracle(res.partition.is_labeled.begin(),
                                          res.partition.is_labeled.end());
        for (std::size_t i = 0; i < bl; ++i) {
          spmis_step(pseudo, feature_bank, is_oracle, batch_l[i], hooks, pseudo_switches,
                     spmis_rng, epoch, res.pseudo_events);
        }
      }

      em.loss_ce += ce;
      em.loss_proto += proto_loss;
      em.loss_inter += inter_loss;
      em.loss_intra += intra_loss;
      em.loss_mix += mix_loss;
      em.loss_total += ce + cfg.weights.proto_align * proto_loss + cfg.weights.inter * inter_loss +
                       cfg.weights.intra * intra_loss + cfg.weights.mix * mix_loss;
    }

    reconcile(pseudo, epoch, res.pseudo_events);

    const double inv_it = 1.0 / static_cast<double>(iterations);
    em.loss_ce *= inv_it;
    em.loss_proto *= inv_it;
    em.loss_inter *= inv_it;
    em.loss_intra *= inv_it;
    em.loss_mix *= inv_it;
    em.loss_total *= inv_it;

    const auto ev = evaluate_model(res.encoder, res.classifier, target);
    em.accuracy = ev.accuracy;
    em.macro_f1 = ev.macro_f1;
    em.kappa = ev.kappa;
    em.qwk = ev.qwk;
    em.pool_size = pseudo.pool.size();
    em.pseudo_count = pseudo.pseudo_count();
    if (pseudo.pool.size() != pseudo.oracle_count() + pseudo.pseudo_count()) {
      throw std::logic_error("adapt: pool size invariant violated");
    }
    res.epoch_metrics.push_back(em);
  }

  const auto final_ev = evaluate_model(res.encoder, res.classifier, target);
  res.final_confusion = final_ev.confusion;
  res.final_preds = final_ev.preds;
  res.final_scores = final_ev.scores;
  res.oracle_distinct = oracle.distinct_queries();
  res.oracle_calls = oracle.total_calls();
  return res;
}

}  // namespace gradapt
