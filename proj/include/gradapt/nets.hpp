#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gradapt/rng.hpp"
#include "gradapt/tensor.hpp"

// The three parametric pieces of the pipeline: a tanh MLP encoder, a linear
// softmax classifier whose weight rows double as class prototypes, and a
// label-conditioned feature generator. Backward passes are hand-written;
// the loss graphs supply d(loss)/d(feature or logits) and these nets push
// that into parameter gradients.

namespace gradapt {

struct Linear {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

// tanh between layers, linear output. Zero hidden layers is a plain linear map.
struct Mlp {
  std::vector<Linear> layers;

  std::size_t input_dim() const { return layers.front().weight.shape[1]; }
  std::size_t output_dim() const { return layers.back().weight.shape[0]; }
};

struct MlpCache {
  std::vector<std::vector<double>> inputs;       // per layer
  std::vector<std::vector<double>> activations;  // tanh outputs per hidden layer
};

struct MlpGrads {
  std::vector<Linear> layers;  // same shapes, gradient accumulators
};

struct EncoderParams {
  Mlp mlp;
};

struct ClassifierParams {
  Tensor weight;  // [classes, feature_dim]; rows act as class prototypes
  Tensor bias;    // [classes]
  bool frozen = false;
};

struct GeneratorParams {
  Tensor embedding;  // [classes, embed_dim]
  Mlp mlp;           // maps [noise_dim + embed_dim] -> feature_dim
};

struct NetConfig {
  std::size_t input_dim = 32;
  std::size_t feature_dim = 16;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t classes = 5;
  std::size_t noise_dim = 16;
  std::size_t embed_dim = 8;
  std::vector<std::size_t> generator_hidden = {64, 64};
};

EncoderParams make_encoder(const NetConfig& cfg, Rng& rng);
ClassifierParams make_classifier(const NetConfig& cfg, Rng& rng);
GeneratorParams make_generator(const NetConfig& cfg, Rng& rng);

std::size_t parameter_count(const Mlp& mlp);
std::size_t parameter_count(const EncoderParams& p);
std::size_t parameter_count(const ClassifierParams& p);
std::size_t parameter_count(const GeneratorParams& p);

// --- forward / backward ----------------------------------------------------

std::vector<double> mlp_forward(const Mlp& mlp, const std::vector<double>& x,
                                MlpCache* cache = nullptr);
MlpGrads make_grads(const Mlp& mlp);
void zero(MlpGrads& grads);
// Accumulates parameter gradients; returns d(loss)/d(input).
std::vector<double> mlp_backward(const Mlp& mlp, const MlpCache& cache,
                                 const std::vector<double>& dy, MlpGrads& grads);

std::vector<double> encode(const EncoderParams& enc, const std::vector<double>& x,
                           MlpCache* cache = nullptr);

std::vector<double> classify_logits(const ClassifierParams& cls, const std::vector<double>& h);
std::vector<double> classify(const ClassifierParams& cls, const std::vector<double>& h);
// d_logits -> (dW, db accumulated), returns dh.
std::vector<double> classifier_backward(const ClassifierParams& cls,
                                        const std::vector<double>& h,
                                        const std::vector<double>& d_logits, Tensor& d_weight,
                                        Tensor& d_bias);

std::vector<double> generate(const GeneratorParams& gen, const std::vector<double>& noise,
                             int label, MlpCache* cache = nullptr);
// Backward through the generator MLP and into the label embedding row.
void generator_backward(const GeneratorParams& gen, const MlpCache& cache,
                        const std::vector<double>& noise, int label,
                        const std::vector<double>& dy, MlpGrads& mlp_grads,
                        Tensor& d_embedding);

// Normalization with a matching backward, used in front of every
// contrastive term.
struct NormalizedFeature {
  std::vector<double> unit;
  double norm = 0.0;
};
NormalizedFeature normalize_feature(const std::vector<double>& h);
std::vector<double> normalize_backward(const NormalizedFeature& nf,
                                       const std::vector<double>& d_unit);

// --- optimizer ---------------------------------------------------------------

struct AdadeltaConfig {
  double rho = 0.9;
  double epsilon = 1e-6;
  double lr = 0.1;
};

struct AdadeltaState {
  AdadeltaConfig cfg;
  std::vector<Tensor> accum_grad;    // E[g^2], one per parameter tensor
  std::vector<Tensor> accum_update;  // E[dx^2]
};

// Named views over every trainable tensor; order is stable and defines the
// optimizer slot layout and the checkpoint block order.
std::vector<std::pair<std::string, Tensor*>> named_parameters(EncoderParams& enc,
                                                              const std::string& prefix);
std::vector<std::pair<std::string, Tensor*>> named_parameters(ClassifierParams& cls,
                                                              const std::string& prefix);
std::vector<std::pair<std::string, Tensor*>> named_parameters(GeneratorParams& gen,
                                                              const std::string& prefix);

AdadeltaState make_adadelta(const std::vector<std::pair<std::string, Tensor*>>& params,
                            const AdadeltaConfig& cfg);

// One update over all parameter tensors. Rejects non-finite gradients and
// shape mismatches with the offending parameter's name.
void adadelta_step(const std::vector<std::pair<std::string, Tensor*>>& params,
                   const std::vector<Tensor>& grads, AdadeltaState& state);

}  // namespace gradapt
