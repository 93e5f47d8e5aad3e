#include "gradapt/stage_source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "../trainer_util.hpp"
#include "gradapt/kernels.hpp"
#include "gradapt/numio.hpp"

namespace gradapt {

namespace {

std::vector<double> one_hot(int label, std::size_t classes) {
  std::vector<double> y(classes, 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

// Margin contrastive over a batch: positive is the next same-class batch
// mate (cyclic), negatives are every other-class mate, margins grow with
// grade distance. Returns the mean loss over usable anchors and adds the
// normalized-space gradients into d_unit.
double batch_contrastive(detail::GraphCache& cache, const OrdinalContrastiveParams& params,
                         const std::vector<NormalizedFeature>& units,
                         const std::vector<int>& labels,
                         std::vector<std::vector<double>>& d_unit) {
  const std::size_t b = units.size();
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> d_anchor;
  std::vector<std::vector<double>> d_members;
  for (std::size_t i = 0; i < b; ++i) {
    // next same-class mate, cyclic
    int positive = -1;
    for (std::size_t step = 1; step < b; ++step) {
      const std::size_t j = (i + step) % b;
      if (labels[j] == labels[i]) {
        positive = static_cast<int>(j);
        break;
      }
    }
    if (positive < 0) continue;

    std::vector<std::vector<double>> members;
    std::vector<double> margins;
    std::vector<std::size_t> member_ids;
    members.push_back(units[static_cast<std::size_t>(positive)].unit);
    margins.push_back(params.gamma);
    member_ids.push_back(static_cast<std::size_t>(positive));
    for (std::size_t j = 0; j < b; ++j) {
      if (labels[j] == labels[i]) continue;
      members.push_back(units[j].unit);
      margins.push_back(params.beta0 * std::abs(labels[i] - labels[j]));
      member_ids.push_back(j);
    }
    if (members.size() < 2) continue;

    total += detail::margin_term(cache, units[i].unit, members, margins, params.tau, d_anchor,
                                 d_members);
    ++used;
    kern::axpy(1.0, d_anchor.data(), d_unit[i].data(), d_anchor.size());
    for (std::size_t r = 0; r < member_ids.size(); ++r) {
      kern::axpy(1.0, d_members[r].data(), d_unit[member_ids[r]].data(), d_members[r].size());
    }
  }
  if (used == 0) return 0.0;
  // mean over anchors: rescale accumulated gradients
  const double inv = 1.0 / static_cast<double>(used);
  for (auto& g : d_unit) kern::scale(g.data(), inv, g.size());
  return total * inv;
}

}  // namespace

SourceTrainResult pretrain_source(const Dataset& source, const SourceTrainConfig& cfg,
                                  const NetConfig& netcfg, std::uint64_t seed) {
  if (cfg.epochs_model < 1) throw std::invalid_argument("pretrain_source: epochs must be >= 1");
  if (cfg.batch < 2) throw std::invalid_argument("pretrain_source: batch must be >= 2");
  const std::size_t classes = netcfg.classes;
  {
    std::vector<char> seen(classes, 0);
    for (int l : source.labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= classes) {
        throw std::invalid_argument("pretrain_source: label out of range");
      }
      seen[static_cast<std::size_t>(l)] = 1;
    }
    for (std::size_t c = 0; c < classes; ++c) {
      if (!seen[c]) {
        throw std::invalid_argument("pretrain_source: class " + std::to_string(c) +
                                    " absent from source data");
      }
    }
  }

  Rng init_rng = Rng::stream(seed, "init.model");
  SourceTrainResult res;
  res.encoder = make_encoder(netcfg, init_rng);
  res.classifier = make_classifier(netcfg, init_rng);

  auto params = named_parameters(res.encoder, "encoder");
  const auto cls_params = named_parameters(res.classifier, "classifier");
  params.insert(params.end(), cls_params.begin(), cls_params.end());
  auto opt = make_adadelta(params, cfg.optimizer);

  detail::GraphCache cache;
  Rng shuffle_rng = Rng::stream(seed, "stage1.shuffle");
  const std::size_t n = source.x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  MlpGrads enc_grads = make_grads(res.encoder.mlp);
  Tensor d_w = Tensor::zeros(res.classifier.weight.shape);
  Tensor d_b = Tensor::zeros(res.classifier.bias.shape);

  for (int epoch = 0; epoch < cfg.epochs_model; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_total = 0.0;
    double epoch_ce = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t b = std::min(cfg.batch, n - start);
      if (b < 2) continue;

      std::vector<MlpCache> caches(b);
      std::vector<std::vector<double>> h(b);
      std::vector<std::vector<double>> logits(b);
      std::vector<std::vector<double>> targets(b);
      std::vector<int> labels(b);
      std::vector<NormalizedFeature> units(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t idx = order[start + i];
        labels[i] = source.labels[idx];
        h[i] = encode(res.encoder, source.x[idx], &caches[i]);
        logits[i] = classify_logits(res.classifier, h[i]);
        targets[i] = one_hot(labels[i], classes);
        units[i] = normalize_feature(h[i]);
      }

      std::vector<std::vector<double>> d_logits;
      const double ce = detail::ce_batch_term(cache, logits, targets, d_logits);

      std::vector<std::vector<double>> d_unit(b, std::vector<double>(h[0].size(), 0.0));
      double chain = 0.0;
      if (cfg.contrastive_weight > 0.0) {
        chain = batch_contrastive(cache, cfg.contrastive, units, labels, d_unit);
      }

      zero(enc_grads);
      std::fill(d_w.values.begin(), d_w.values.end(), 0.0);
      std::fill(d_b.values.begin(), d_b.values.end(), 0.0);
      for (std::size_t i = 0; i < b; ++i) {
        auto dh = classifier_backward(res.classifier, h[i], d_logits[i], d_w, d_b);
        if (cfg.contrastive_weight > 0.0) {
          kern::scale(d_unit[i].data(), cfg.contrastive_weight, d_unit[i].size());
          const auto dh_chain = normalize_backward(units[i], d_unit[i]);
          kern::axpy(1.0, dh_chain.data(), dh.data(), dh.size());
        }
        mlp_backward(res.encoder.mlp, caches[i], dh, enc_grads);
      }

      std::vector<Tensor> grads;
      for (auto& l : enc_grads.layers) {
        grads.push_back(l.weight);
        grads.push_back(l.bias);
      }
      grads.push_back(d_w);
      grads.push_back(d_b);
      adadelta_step(params, grads, opt);

      epoch_total += ce + cfg.contrastive_weight * chain;
      epoch_ce += ce;
      ++batches;
    }
    res.loss_trace.push_back(epoch_total / static_cast<double>(batches));
    res.ce_trace.push_back(epoch_ce / static_cast<double>(batches));
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = classify(res.classifier, encode(res.encoder, source.x[i]));
    std::size_t arg = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (p[c] > p[arg]) arg = c;
    }
    correct += static_cast<int>(arg) == source.labels[i] ? 1 : 0;
  }
  res.final_train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return res;
}

GeneratorTrainResult train_generator(const ClassifierParams& classifier,
                                     const SourceTrainConfig& cfg, const NetConfig& netcfg,
                                     std::uint64_t seed) {
  if (!classifier.frozen) {
    throw std::invalid_argument("train_generator: classifier must be marked frozen");
  }
  if (cfg.epochs_generator < 1) {
    throw std::invalid_argument("train_generator: epochs must be >= 1");
  }
  if (cfg.batch < 2) throw std::invalid_argument("train_generator: batch must be >= 2");

  Rng init_rng = Rng::stream(seed, "init.generator");
  GeneratorTrainResult res;
  res.generator = make_generator(netcfg, init_rng);

  auto params = named_parameters(res.generator, "generator");
  auto opt = make_adadelta(params, cfg.optimizer);

  detail::GraphCache cache;
  Rng noise_rng = Rng::stream(seed, "stage1.gen_noise");
  MlpGrads gen_grads = make_grads(res.generator.mlp);
  Tensor d_emb = Tensor::zeros(res.generator.embedding.shape);
  const std::size_t classes = netcfg.classes;

  for (int it = 0; it < cfg.epochs_generator; ++it) {
    const std::size_t b = cfg.batch;
    std::vector<std::vector<double>> noise(b, std::vector<double>(netcfg.noise_dim));
    std::vector<int> labels(b);
    std::vector<MlpCache> caches(b);
    std::vector<std::vector<double>> f(b);
    std::vector<std::vector<double>> logits(b);
    std::vector<std::vector<double>> targets(b);
    std::vector<NormalizedFeature> units(b);
    for (std::size_t i = 0; i < b; ++i) {
      for (auto& v : noise[i]) v = noise_rng.normal();
      labels[i] = static_cast<int>(noise_rng.uniform_int(0, static_cast<int>(classes) - 1));
      f[i] = generate(res.generator, noise[i], labels[i], &caches[i]);
      logits[i] = classify_logits(classifier, f[i]);
      targets[i] = one_hot(labels[i], classes);
      units[i] = normalize_feature(f[i]);
    }

    std::vector<std::vector<double>> d_logits;
    const double ce = detail::ce_batch_term(cache, logits, targets, d_logits);

    std::vector<std::vector<double>> d_unit(b, std::vector<double>(f[0].size(), 0.0));
    double chain = 0.0;
    if (cfg.contrastive_weight > 0.0) {
      chain = batch_contrastive(cache, cfg.contrastive, units, labels, d_unit);
    }

    zero(gen_grads);
    std::fill(d_emb.values.begin(), d_emb.values.end(), 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      // frozen classifier: gradient passes through W but never updates it
      const std::size_t k = classifier.weight.shape[0];
      const std::size_t d = classifier.weight.shape[1];
      std::vector<double> df(d, 0.0);
      kern::gemv_transposed_accumulate(classifier.weight.values.data(), k, d,
                                       d_logits[i].data(), df.data());
      if (cfg.contrastive_weight > 0.0) {
        kern::scale(d_unit[i].data(), cfg.contrastive_weight, d_unit[i].size());
        const auto df_chain = normalize_backward(units[i], d_unit[i]);
        kern::axpy(1.0, df_chain.data(), df.data(), df.size());
      }
      generator_backward(res.generator, caches[i], noise[i], labels[i], df, gen_grads, d_emb);
    }

    std::vector<Tensor> grads;
    grads.push_back(d_emb);
    for (auto& l : gen_grads.layers) {
      grads.push_back(l.weight);
      grads.push_back(l.bias);
    }
    adadelta_step(params, grads, opt);
    res.loss_trace.push_back(ce + cfg.contrastive_weight * chain);
  }
  return res;
}

std::vector<std::vector<double>> class_cosine_matrix(
    const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
    std::size_t classes) {
  const std::size_t n = features.size();
  const std::size_t d = n > 0 ? features[0].size() : 0;
  std::vector<std::vector<double>> units(n);
  for (std::size_t i = 0; i < n; ++i) {
    units[i] = features[i];
    const double norm = kern::norm2(units[i].data(), d);
    if (norm > 0.0) kern::scale(units[i].data(), 1.0 / norm, d);
  }
  std::vector<std::vector<double>> sums(classes, std::vector<double>(classes, 0.0));
  std::vector<std::vector<double>> counts(classes, std::vector<double>(classes, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = static_cast<std::size_t>(labels[i]);
      const auto b = static_cast<std::size_t>(labels[j]);
      const double cos = kern::dot(units[i].data(), units[j].data(), d);
      sums[a][b] += cos;
      counts[a][b] += 1.0;
      if (a != b) {
        sums[b][a] += cos;
        counts[b][a] += 1.0;
      }
    }
  }
  for (std::size_t a = 0; a < classes; ++a) {
    for (std::size_t b = 0; b < classes; ++b) {
      if (counts[a][b] > 0.0) sums[a][b] /= counts[a][b];
    }
  }
  return sums;
}

void export_features(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const std::string& tag,
                     const FileMeta& meta, const std::string& path) {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("export_features: feature/label count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_features: cannot write " + path);
  const std::size_t d = features.empty() ? 0 : features[0].size();
  out << "# n=" << features.size() << " d=" << d << " tag=" << tag
      << " config=" << meta.config_hash << " seed=" << meta.seed << "\n";
  out << "label";
  for (std::size_t c = 0; c < d; ++c) out << ",f" << c;
  out << "\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << labels[i];
    for (std::size_t c = 0; c < d; ++c) out << "," << format_double(features[i][c]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("export_features: write failed for " + path);
}

FeatureDump read_feature_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_feature_dump: cannot read " + path);
  FeatureDump dump;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# n=", 0) != 0) {
    throw std::runtime_error("read_feature_dump: missing meta line");
  }
  {
    std::stringstream ss(line.substr(2));
    std::string field;
    while (ss >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "n") dump.n = static_cast<std::size_t>(std::stoull(val));
      if (key == "d") dump.dim = static_cast<std::size_t>(std::stoull(val));
      if (key == "tag") dump.tag = val;
    }
  }
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    dump.labels.push_back(std::stoi(field));
    std::vector<double> row;
    row.reserve(dump.dim);
    while (std::getline(ss, field, ',')) row.push_back(parse_double(field));
    dump.features.push_back(std::move(row));
  }
  return dump;
}

}  // namespace gradapt
