#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradapt/losses.hpp"
#include "gradapt/nets.hpp"
#include "gradapt/synth.hpp"

// Stage one: supervised source training with cross-entropy plus the
// ordinal-margin contrastive term, then a feature generator trained against
// the frozen classifier from noise and uniformly drawn labels.

namespace gradapt {

struct SourceTrainConfig {
  int epochs_model = 100;
  int epochs_generator = 1000;
  std::size_t batch = 64;
  OrdinalContrastiveParams contrastive;
  double contrastive_weight = 1.0;
  AdadeltaConfig optimizer;
};

struct SourceTrainResult {
  EncoderParams encoder;
  ClassifierParams classifier;
  std::vector<double> loss_trace;     // per-epoch mean of the total objective
  std::vector<double> ce_trace;       // per-epoch mean cross-entropy alone
  double final_train_accuracy = 0.0;
};

SourceTrainResult pretrain_source(const Dataset& source, const SourceTrainConfig& cfg,
                                  const NetConfig& netcfg, std::uint64_t seed);

struct GeneratorTrainResult {
  GeneratorParams generator;
  std::vector<double> loss_trace;  // per-iteration objective
};

// The classifier must be marked frozen; its parameters are never touched.
GeneratorTrainResult train_generator(const ClassifierParams& classifier,
                                     const SourceTrainConfig& cfg, const NetConfig& netcfg,
                                     std::uint64_t seed);

// Mean pairwise cosine similarity between features of each class pair;
// entry [a][b] averages cos(h_i, h_j) over i in class a, j in class b.
std::vector<std::vector<double>> class_cosine_matrix(
    const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
    std::size_t classes);

struct FileMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Feature dump: meta line, column header, then one row per feature with the
// label in front. Values round-trip exactly.
void export_features(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const std::string& tag,
                     const FileMeta& meta, const std::string& path);

struct FeatureDump {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::string tag;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};
FeatureDump read_feature_dump(const std::string& path);

}  // namespace gradapt
