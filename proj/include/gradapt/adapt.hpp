#pragma once

#include <cstdint>
#include <vector>

#include "gradapt/active.hpp"
#include "gradapt/banks.hpp"
#include "gradapt/losses.hpp"
#include "gradapt/metrics.hpp"
#include "gradapt/nets.hpp"
#include "gradapt/pseudo.hpp"
#include "gradapt/stage_source.hpp"
#include "gradapt/synth.hpp"

// Stage three with stage two interleaved: labeling rounds on the configured
// epochs, then per-iteration training on the five-term objective with
// generator-fed prototypes, transport and view consistency on augmented
// unlabeled batches, mixup cross-entropy, and the pseudo-label machine once
// its start epoch passes.

namespace gradapt {

struct AblationSwitches {
  bool proto_align = true;
  bool inter_consistency = true;
  bool intra_consistency = true;
  bool mixup = true;
  bool pseudo_labels = true;
  bool pseudo_add = true;
  bool pseudo_mix_check = true;
  bool pseudo_revoke = true;
};

struct AdaptConfig {
  int epochs = 15;
  std::size_t batch_labeled = 32;
  std::size_t batch_unlabeled = 32;
  LossWeights weights;
  double proto_tau = 0.5;

  double ot_epsilon = 0.05;
  int ot_max_iters = 200;
  double ot_tol = 1e-6;
  double tau_scale = 10.0;
  // Transport class marginal from the model's batch-mean predictions rather
  // than uniform; uniform forces mass into classes a batch may not contain.
  bool estimated_marginal = true;

  PseudoThresholds thresholds;
  int pseudo_start_epoch = 6;

  double prototype_ema = 0.99;
  double feature_bank_ema = 0.9;
  std::size_t prototype_batch = 16;

  double sigma_weak = 0.05;
  double sigma_strong = 0.2;
  double drop_rate = 0.1;
  double mix_alpha = 1.0;
  double mix_beta = 1.0;

  std::size_t k_nn = 8;
  KernelSpec kernel;
  std::vector<int> active_round_epochs = {0, 1, 2, 3, 4};
  std::size_t budget_total = 100;
  bool matching_selection = true;  // false: uniform-random rounds

  AdadeltaConfig optimizer;
  AblationSwitches ablation;
};

struct EpochMetrics {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_ce = 0.0;
  double loss_proto = 0.0;
  double loss_inter = 0.0;
  double loss_intra = 0.0;
  double loss_mix = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  double qwk = 0.0;
  std::size_t pool_size = 0;
  std::size_t pseudo_count = 0;
};

struct AdaptResult {
  EncoderParams encoder;
  ClassifierParams classifier;
  std::vector<EpochMetrics> epoch_metrics;
  std::vector<SelectionRound> selection_rounds;
  std::vector<PseudoEvent> pseudo_events;
  DatasetPartition partition;
  ConfusionMatrix final_confusion;
  std::vector<int> final_preds;
  std::vector<std::vector<double>> final_scores;
  std::size_t oracle_distinct = 0;
  std::size_t oracle_calls = 0;
};

AdaptResult adapt(const EncoderParams& encoder0, const ClassifierParams& classifier0,
                  const GeneratorParams& generator, const Dataset& target, LabelOracle& oracle,
                  const AdaptConfig& cfg, const NetConfig& netcfg, std::uint64_t seed);

// Weak: additive Gaussian noise. Strong: heavier noise plus random
// coordinate zeroing.
std::vector<double> augment_weak(const std::vector<double>& x, double sigma, Rng& rng);
std::vector<double> augment_strong(const std::vector<double>& x, double sigma, double drop_rate,
                                   Rng& rng);

// Full-target evaluation against ground truth (evaluation only; the
// training path sees labels exclusively through the oracle and the pool).
struct Evaluation {
  ConfusionMatrix confusion;
  std::vector<int> preds;
  std::vector<std::vector<double>> scores;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  double qwk = 0.0;
};
Evaluation evaluate_model(const EncoderParams& enc, const ClassifierParams& cls,
                          const Dataset& target);

}  // namespace gradapt
