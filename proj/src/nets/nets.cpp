#include "gradapt/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "gradapt/kernels.hpp"

namespace gradapt {

namespace {

Linear init_linear(std::size_t out, std::size_t in, Rng& rng) {
  Linear l;
  l.weight = Tensor::zeros({out, in});
  l.bias = Tensor::zeros({out});
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& w : l.weight.values) w = rng.normal(0.0, std_dev);
  return l;
}

Mlp init_mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng) {
  Mlp mlp;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    mlp.layers.push_back(init_linear(h, prev, rng));
    prev = h;
  }
  mlp.layers.push_back(init_linear(out, prev, rng));
  return mlp;
}

}  // namespace

EncoderParams make_encoder(const NetConfig& cfg, Rng& rng) {
  EncoderParams enc;
  enc.mlp = init_mlp(cfg.input_dim, cfg.hidden, cfg.feature_dim, rng);
  return enc;
}

ClassifierParams make_classifier(const NetConfig& cfg, Rng& rng) {
  ClassifierParams cls;
  cls.weight = Tensor::zeros({cfg.classes, cfg.feature_dim});
  cls.bias = Tensor::zeros({cfg.classes});
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
  for (auto& w : cls.weight.values) w = rng.normal(0.0, std_dev);
  return cls;
}

GeneratorParams make_generator(const NetConfig& cfg, Rng& rng) {
  GeneratorParams gen;
  gen.embedding = Tensor::zeros({cfg.classes, cfg.embed_dim});
  for (auto& w : gen.embedding.values) w = rng.normal(0.0, 1.0);
  gen.mlp = init_mlp(cfg.noise_dim + cfg.embed_dim, cfg.generator_hidden, cfg.feature_dim, rng);
  return gen;
}

std::size_t parameter_count(const Mlp& mlp) {
  std::size_t n = 0;
  for (const auto& l : mlp.layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::size_t parameter_count(const EncoderParams& p) { return parameter_count(p.mlp); }

std::size_t parameter_count(const ClassifierParams& p) {
  return p.weight.size() + p.bias.size();
}

std::size_t parameter_count(const GeneratorParams& p) {
  return p.embedding.size() + parameter_count(p.mlp);
}

std::vector<double> mlp_forward(const Mlp& mlp, const std::vector<double>& x,
                                MlpCache* cache) {
  if (x.size() != mlp.input_dim()) throw std::invalid_argument("mlp: input dimension mismatch");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->activations.clear();
  }
  std::vector<double> cur = x;
  for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
    const Linear& l = mlp.layers[li];
    const std::size_t out = l.weight.shape[0];
    const std::size_t in = l.weight.shape[1];
    if (cache != nullptr) cache->inputs.push_back(cur);
    std::vector<double> next(out);
    kern::gemv(l.weight.values.data(), out, in, cur.data(), next.data());
    kern::add(next.data(), l.bias.values.data(), next.data(), out);
    const bool last = li + 1 == mlp.layers.size();
    if (!last) {
      kern::tanh_vec(next.data(), next.data(), out);
      if (cache != nullptr) cache->activations.push_back(next);
    }
    cur = std::move(next);
  }
  return cur;
}

MlpGrads make_grads(const Mlp& mlp) {
  MlpGrads g;
  for (const auto& l : mlp.layers) {
    Linear z;
    z.weight = Tensor::zeros(l.weight.shape);
    z.bias = Tensor::zeros(l.bias.shape);
    g.layers.push_back(std::move(z));
  }
  return g;
}

void zero(MlpGrads& grads) {
  for (auto& l : grads.layers) {
    std::fill(l.weight.values.begin(), l.weight.values.end(), 0.0);
    std::fill(l.bias.values.begin(), l.bias.values.end(), 0.0);
  }
}

std::vector<double> mlp_backward(const Mlp& mlp, const MlpCache& cache,
                                 const std::vector<double>& dy, MlpGrads& grads) {
  std::vector<double> delta = dy;
  for (std::size_t li = mlp.layers.size(); li-- > 0;) {
    const Linear& l = mlp.layers[li];
    const std::size_t out = l.weight.shape[0];
    const std::size_t in = l.weight.shape[1];
    const bool last = li + 1 == mlp.layers.size();
    if (!last) {
      // through tanh: d pre = (1 - a^2) * d post
      const auto& a = cache.activations[li];
      for (std::size_t i = 0; i < out; ++i) delta[i] *= 1.0 - a[i] * a[i];
    }
    kern::rank1_accumulate(grads.layers[li].weight.values.data(), out, in, 1.0, delta.data(),
                           cache.inputs[li].data());
    kern::axpy(1.0, delta.data(), grads.layers[li].bias.values.data(), out);
    std::vector<double> dx(in, 0.0);
    kern::gemv_transposed_accumulate(l.weight.values.data(), out, in, delta.data(), dx.data());
    delta = std::move(dx);
  }
  return delta;
}

std::vector<double> encode(const EncoderParams& enc, const std::vector<double>& x,
                           MlpCache* cache) {
  return mlp_forward(enc.mlp, x, cache);
}

std::vector<double> classify_logits(const ClassifierParams& cls, const std::vector<double>& h) {
  const std::size_t k = cls.weight.shape[0];
  const std::size_t d = cls.weight.shape[1];
  if (h.size() != d) throw std::invalid_argument("classify: feature dimension mismatch");
  std::vector<double> z(k);
  kern::gemv(cls.weight.values.data(), k, d, h.data(), z.data());
  kern::add(z.data(), cls.bias.values.data(), z.data(), k);
  return z;
}

std::vector<double> classify(const ClassifierParams& cls, const std::vector<double>& h) {
  auto z = classify_logits(cls, h);
  const double m = kern::max_value(z.data(), z.size());
  double total = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    total += v;
  }
  kern::scale(z.data(), 1.0 / total, z.size());
  return z;
}

std::vector<double> classifier_backward(const ClassifierParams& cls,
                                        const std::vector<double>& h,
                                        const std::vector<double>& d_logits, Tensor& d_weight,
                                        Tensor& d_bias) {
  const std::size_t k = cls.weight.shape[0];
  const std::size_t d = cls.weight.shape[1];
  kern::rank1_accumulate(d_weight.values.data(), k, d, 1.0, d_logits.data(), h.data());
  kern::axpy(1.0, d_logits.data(), d_bias.values.data(), k);
  std::vector<double> dh(d, 0.0);
  kern::gemv_transposed_accumulate(cls.weight.values.data(), k, d, d_logits.data(), dh.data());
  return dh;
}

std::vector<double> generate(const GeneratorParams& gen, const std::vector<double>& noise,
                             int label, MlpCache* cache) {
  const std::size_t k = gen.embedding.shape[0];
  const std::size_t de = gen.embedding.shape[1];
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw std::invalid_argument("generate: label out of range");
  }
  std::vector<double> input;
  input.reserve(noise.size() + de);
  input.insert(input.end(), noise.begin(), noise.end());
  const double* row = gen.embedding.values.data() + static_cast<std::size_t>(label) * de;
  input.insert(input.end(), row, row + de);
  return mlp_forward(gen.mlp, input, cache);
}

void generator_backward(const GeneratorParams& gen, const MlpCache& cache,
                        const std::vector<double>& noise, int label,
                        const std::vector<double>& dy, MlpGrads& mlp_grads,
                        Tensor& d_embedding) {
  const auto d_input = mlp_backward(gen.mlp, cache, dy, mlp_grads);
  const std::size_t de = gen.embedding.shape[1];
  // noise gradient is discarded; embedding row accumulates its slice
  kern::axpy(1.0, d_input.data() + noise.size(),
             d_embedding.values.data() + static_cast<std::size_t>(label) * de, de);
}

NormalizedFeature normalize_feature(const std::vector<double>& h) {
  NormalizedFeature nf;
  nf.unit = h;
  nf.norm = kern::norm2(h.data(), h.size());
  if (nf.norm == 0.0) throw std::invalid_argument("normalize_feature: zero-norm feature");
  kern::scale(nf.unit.data(), 1.0 / nf.norm, nf.unit.size());
  return nf;
}

std::vector<double> normalize_backward(const NormalizedFeature& nf,
                                       const std::vector<double>& d_unit) {
  const std::size_t d = nf.unit.size();
  const double proj = kern::dot(d_unit.data(), nf.unit.data(), d);
  std::vector<double> dh(d);
  for (std::size_t i = 0; i < d; ++i) dh[i] = (d_unit[i] - proj * nf.unit[i]) / nf.norm;
  return dh;
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(EncoderParams& enc,
                                                              const std::string& prefix) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (std::size_t i = 0; i < enc.mlp.layers.size(); ++i) {
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".weight",
                     &enc.mlp.layers[i].weight);
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".bias", &enc.mlp.layers[i].bias);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(ClassifierParams& cls,
                                                              const std::string& prefix) {
  return {{prefix + ".weight", &cls.weight}, {prefix + ".bias", &cls.bias}};
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(GeneratorParams& gen,
                                                              const std::string& prefix) {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back(prefix + ".embedding", &gen.embedding);
  for (std::size_t i = 0; i < gen.mlp.layers.size(); ++i) {
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".weight",
                     &gen.mlp.layers[i].weight);
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".bias", &gen.mlp.layers[i].bias);
  }
  return out;
}

AdadeltaState make_adadelta(const std::vector<std::pair<std::string, Tensor*>>& params,
                            const AdadeltaConfig& cfg) {
  AdadeltaState st;
  st.cfg = cfg;
  for (const auto& [name, t] : params) {
    (void)name;
    st.accum_grad.push_back(Tensor::zeros(t->shape));
    st.accum_update.push_back(Tensor::zeros(t->shape));
  }
  return st;
}

void adadelta_step(const std::vector<std::pair<std::string, Tensor*>>& params,
                   const std::vector<Tensor>& grads, AdadeltaState& state) {
  if (params.size() != grads.size() || params.size() != state.accum_grad.size()) {
    throw std::invalid_argument("adadelta: parameter/gradient count mismatch");
  }
  const double rho = state.cfg.rho;
  const double eps = state.cfg.epsilon;
  const double lr = state.cfg.lr;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& x = *params[p].second;
    const Tensor& g = grads[p];
    if (g.shape != x.shape) {
      throw std::invalid_argument("adadelta: shape mismatch for " + params[p].first);
    }
    if (!g.all_finite()) {
      throw std::runtime_error("adadelta: non-finite gradient for " + params[p].first);
    }
    Tensor& eg = state.accum_grad[p];
    Tensor& ex = state.accum_update[p];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g.values[i];
      eg.values[i] = rho * eg.values[i] + (1.0 - rho) * gi * gi;
      const double dx = -std::sqrt(ex.values[i] + eps) / std::sqrt(eg.values[i] + eps) * gi;
      ex.values[i] = rho * ex.values[i] + (1.0 - rho) * dx * dx;
      x.values[i] += lr * dx;
    }
  }
}

}  // namespace gradapt
