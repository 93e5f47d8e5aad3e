#include "gradapt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gradapt {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw std::invalid_argument("config: " + path + ": " + why);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) bad(path + "." + key, "unknown key");
  }
}

template <class T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(path + "." + key, "wrong type");
  }
}

void parse_curve(const json& j, const std::string& path, CurveSpec& out) {
  check_keys(j, path, {"radius", "angle_step", "pitch"});
  out.radius = get_or(j, path, "radius", out.radius);
  out.angle_step = get_or(j, path, "angle_step", out.angle_step);
  out.pitch = get_or(j, path, "pitch", out.pitch);
  if (out.radius <= 0.0) bad(path + ".radius", "must be positive");
}

void parse_shift(const json& j, const std::string& path, ShiftSpec& out) {
  check_keys(j, path, {"rotations", "scale", "offset", "noise_sigma"});
  if (j.contains("rotations")) {
    out.rotations.clear();
    for (const auto& r : j.at("rotations")) {
      if (!r.is_array() || r.size() != 3) bad(path + ".rotations", "entries must be [a, b, angle]");
      out.rotations.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>(),
                               r[2].get<double>()});
    }
  }
  out.scale = get_or(j, path, "scale", out.scale);
  out.offset = get_or(j, path, "offset", out.offset);
  out.noise_sigma = get_or(j, path, "noise_sigma", out.noise_sigma);
  if (out.scale == 0.0) bad(path + ".scale", "zero scale makes the shift singular");
  if (out.noise_sigma < 0.0) bad(path + ".noise_sigma", "must be nonnegative");
}

void parse_data(const json& j, RunConfig& cfg) {
  const std::string path = "data";
  check_keys(j, path,
             {"n_source", "n_target", "input_dim", "classes", "proportions", "class_sigma",
              "tangent_sigma_scale", "curve", "shift", "outlier_fraction",
              "outlier_box_sigmas"});
  cfg.source_spec.n = get_or<std::size_t>(j, path, "n_source", cfg.source_spec.n);
  cfg.target_spec.n = get_or<std::size_t>(j, path, "n_target", cfg.target_spec.n);
  const auto dim = get_or<std::size_t>(j, path, "input_dim", cfg.source_spec.input_dim);
  const auto classes = get_or<std::size_t>(j, path, "classes", cfg.source_spec.classes);
  cfg.source_spec.input_dim = dim;
  cfg.target_spec.input_dim = dim;
  cfg.source_spec.classes = classes;
  cfg.target_spec.classes = classes;
  if (j.contains("proportions")) {
    const auto p = j.at("proportions").get<std::vector<double>>();
    cfg.source_spec.proportions = p;
    cfg.target_spec.proportions = p;
  }
  const auto sigma = get_or(j, path, "class_sigma", cfg.source_spec.class_sigma);
  cfg.source_spec.class_sigma = sigma;
  cfg.target_spec.class_sigma = sigma;
  const auto tangent = get_or(j, path, "tangent_sigma_scale", cfg.source_spec.tangent_sigma_scale);
  if (tangent < 1.0) bad(path + ".tangent_sigma_scale", "must be >= 1");
  cfg.source_spec.tangent_sigma_scale = tangent;
  cfg.target_spec.tangent_sigma_scale = tangent;
  if (j.contains("curve")) {
    parse_curve(j.at("curve"), path + ".curve", cfg.source_spec.curve);
    cfg.target_spec.curve = cfg.source_spec.curve;
  }
  if (j.contains("shift")) parse_shift(j.at("shift"), path + ".shift", cfg.target_spec.shift);
  cfg.target_spec.outlier_fraction =
      get_or(j, path, "outlier_fraction", cfg.target_spec.outlier_fraction);
  cfg.target_spec.outlier_box_sigmas =
      get_or(j, path, "outlier_box_sigmas", cfg.target_spec.outlier_box_sigmas);
  if (cfg.target_spec.outlier_fraction < 0.0 || cfg.target_spec.outlier_fraction > 0.2) {
    bad(path + ".outlier_fraction", "must lie in [0, 0.2]");
  }
}

void parse_model(const json& j, RunConfig& cfg) {
  const std::string path = "model";
  check_keys(j, path, {"feature_dim", "hidden", "noise_dim", "embed_dim", "generator_hidden"});
  cfg.net.feature_dim = get_or<std::size_t>(j, path, "feature_dim", cfg.net.feature_dim);
  if (j.contains("hidden")) cfg.net.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  cfg.net.noise_dim = get_or<std::size_t>(j, path, "noise_dim", cfg.net.noise_dim);
  cfg.net.embed_dim = get_or<std::size_t>(j, path, "embed_dim", cfg.net.embed_dim);
  if (j.contains("generator_hidden")) {
    cfg.net.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
  }
  if (cfg.net.feature_dim == 0) bad(path + ".feature_dim", "must be positive");
}

void parse_optimizer(const json& j, RunConfig& cfg) {
  const std::string path = "optimizer";
  check_keys(j, path, {"rho", "epsilon", "lr"});
  AdadeltaConfig o;
  o.rho = get_or(j, path, "rho", o.rho);
  o.epsilon = get_or(j, path, "epsilon", o.epsilon);
  o.lr = get_or(j, path, "lr", o.lr);
  if (o.rho < 0.0 || o.rho >= 1.0) bad(path + ".rho", "must lie in [0, 1)");
  if (o.epsilon <= 0.0) bad(path + ".epsilon", "must be positive");
  if (o.lr <= 0.0) bad(path + ".lr", "must be positive");
  cfg.stage1.optimizer = o;
  cfg.adapt.optimizer = o;
}

void parse_source(const json& j, RunConfig& cfg) {
  const std::string path = "source";
  check_keys(j, path, {"epochs_model", "epochs_generator", "batch", "contrastive"});
  cfg.stage1.epochs_model = get_or(j, path, "epochs_model", cfg.stage1.epochs_model);
  cfg.stage1.epochs_generator = get_or(j, path, "epochs_generator", cfg.stage1.epochs_generator);
  cfg.stage1.batch = get_or<std::size_t>(j, path, "batch", cfg.stage1.batch);
  if (j.contains("contrastive")) {
    const auto& c = j.at("contrastive");
    check_keys(c, path + ".contrastive", {"tau", "gamma", "beta0", "weight"});
    cfg.stage1.contrastive.tau = get_or(c, path, "tau", cfg.stage1.contrastive.tau);
    cfg.stage1.contrastive.gamma = get_or(c, path, "gamma", cfg.stage1.contrastive.gamma);
    cfg.stage1.contrastive.beta0 = get_or(c, path, "beta0", cfg.stage1.contrastive.beta0);
    cfg.stage1.contrastive_weight = get_or(c, path, "weight", cfg.stage1.contrastive_weight);
  }
  if (cfg.stage1.epochs_model < 1) bad(path + ".epochs_model", "must be >= 1");
  if (cfg.stage1.epochs_generator < 1) bad(path + ".epochs_generator", "must be >= 1");
  if (cfg.stage1.batch < 2) bad(path + ".batch", "must be >= 2");
  if (cfg.stage1.contrastive.tau <= 0.0) bad(path + ".contrastive.tau", "must be positive");
  if (cfg.stage1.contrastive.gamma < 0.0) bad(path + ".contrastive.gamma", "must be >= 0");
  if (cfg.stage1.contrastive.beta0 < 0.0) bad(path + ".contrastive.beta0", "must be >= 0");
  if (cfg.stage1.contrastive_weight < 0.0) bad(path + ".contrastive.weight", "must be >= 0");
}

void parse_active(const json& j, RunConfig& cfg) {
  const std::string path = "active";
  check_keys(j, path, {"budget_fraction", "rounds", "neighbors", "kernel", "strategy",
                       "round_epochs"});
  cfg.budget_fraction = get_or(j, path, "budget_fraction", cfg.budget_fraction);
  cfg.rounds = get_or(j, path, "rounds", cfg.rounds);
  cfg.adapt.k_nn = get_or<std::size_t>(j, path, "neighbors", cfg.adapt.k_nn);
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    check_keys(k, path + ".kernel", {"kind", "bandwidth"});
    const auto kind = get_or<std::string>(k, path + ".kernel", "kind", "rbf");
    if (kind == "rbf") {
      cfg.adapt.kernel.kind = KernelSpec::Kind::Rbf;
    } else if (kind == "linear") {
      cfg.adapt.kernel.kind = KernelSpec::Kind::Linear;
    } else {
      bad(path + ".kernel.kind", "must be rbf or linear");
    }
    cfg.adapt.kernel.bandwidth = get_or(k, path + ".kernel", "bandwidth", 0.0);
  }
  if (j.contains("strategy")) {
    const auto s = j.at("strategy").get<std::string>();
    if (s == "matching") {
      cfg.adapt.matching_selection = true;
    } else if (s == "random") {
      cfg.adapt.matching_selection = false;
    } else {
      bad(path + ".strategy", "must be matching or random");
    }
  }
  if (j.contains("round_epochs")) {
    cfg.adapt.active_round_epochs = j.at("round_epochs").get<std::vector<int>>();
    cfg.rounds = static_cast<int>(cfg.adapt.active_round_epochs.size());
  }
  if (cfg.budget_fraction <= 0.0 || cfg.budget_fraction > 1.0) {
    bad(path + ".budget_fraction", "must lie in (0, 1]");
  }
  if (cfg.rounds < 1) bad(path + ".rounds", "must be >= 1");
  if (cfg.adapt.k_nn < 1) bad(path + ".neighbors", "must be >= 1");
}

void parse_adapt(const json& j, RunConfig& cfg) {
  const std::string path = "adapt";
  check_keys(j, path, {"epochs", "batch_labeled", "batch_unlabeled", "weights", "proto_tau",
                       "transport", "pseudo", "ema", "augment", "mixup", "prototype_batch"});
  auto& a = cfg.adapt;
  a.epochs = get_or(j, path, "epochs", a.epochs);
  a.batch_labeled = get_or<std::size_t>(j, path, "batch_labeled", a.batch_labeled);
  a.batch_unlabeled = get_or<std::size_t>(j, path, "batch_unlabeled", a.batch_unlabeled);
  a.proto_tau = get_or(j, path, "proto_tau", a.proto_tau);
  a.prototype_batch = get_or<std::size_t>(j, path, "prototype_batch", a.prototype_batch);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    check_keys(w, path + ".weights", {"proto_align", "inter", "intra", "mix"});
    a.weights.proto_align = get_or(w, path, "proto_align", a.weights.proto_align);
    a.weights.inter = get_or(w, path, "inter", a.weights.inter);
    a.weights.intra = get_or(w, path, "intra", a.weights.intra);
    a.weights.mix = get_or(w, path, "mix", a.weights.mix);
    if (a.weights.proto_align < 0 || a.weights.inter < 0 || a.weights.intra < 0 ||
        a.weights.mix < 0) {
      bad(path + ".weights", "must be nonnegative");
    }
  }
  if (j.contains("transport")) {
    const auto& t = j.at("transport");
    check_keys(t, path + ".transport", {"epsilon", "max_iters", "tol", "tau_scale", "marginal"});
    a.ot_epsilon = get_or(t, path, "epsilon", a.ot_epsilon);
    a.ot_max_iters = get_or(t, path, "max_iters", a.ot_max_iters);
    a.ot_tol = get_or(t, path, "tol", a.ot_tol);
    a.tau_scale = get_or(t, path, "tau_scale", a.tau_scale);
    if (t.contains("marginal")) {
      const auto m = t.at("marginal").get<std::string>();
      if (m == "uniform") {
        a.estimated_marginal = false;
      } else if (m == "estimated") {
        a.estimated_marginal = true;
      } else {
        bad(path + ".transport.marginal", "must be uniform or estimated");
      }
    }
    if (a.ot_epsilon <= 0.0) bad(path + ".transport.epsilon", "must be positive");
  }
  if (j.contains("pseudo")) {
    const auto& p = j.at("pseudo");
    check_keys(p, path + ".pseudo", {"phi_a", "phi_b", "top_k", "start_epoch"});
    a.thresholds.phi_a = get_or(p, path, "phi_a", a.thresholds.phi_a);
    a.thresholds.phi_b = get_or(p, path, "phi_b", a.thresholds.phi_b);
    a.thresholds.top_k = get_or(p, path, "top_k", a.thresholds.top_k);
    a.pseudo_start_epoch = get_or(p, path, "start_epoch", a.pseudo_start_epoch);
    if (a.thresholds.phi_a <= 0.0 || a.thresholds.phi_a > 1.0) {
      bad(path + ".pseudo.phi_a", "must lie in (0, 1]");
    }
    if (a.thresholds.phi_b <= 0.0 || a.thresholds.phi_b > 1.0) {
      bad(path + ".pseudo.phi_b", "must lie in (0, 1]");
    }
    if (a.thresholds.top_k < 1) bad(path + ".pseudo.top_k", "must be >= 1");
  }
  if (j.contains("ema")) {
    const auto& e = j.at("ema");
    check_keys(e, path + ".ema", {"prototype", "feature_bank"});
    a.prototype_ema = get_or(e, path, "prototype", a.prototype_ema);
    a.feature_bank_ema = get_or(e, path, "feature_bank", a.feature_bank_ema);
    if (a.prototype_ema < 0.0 || a.prototype_ema > 1.0) bad(path + ".ema.prototype", "in [0,1]");
    if (a.feature_bank_ema < 0.0 || a.feature_bank_ema > 1.0) {
      bad(path + ".ema.feature_bank", "in [0,1]");
    }
  }
  if (j.contains("augment")) {
    const auto& g = j.at("augment");
    check_keys(g, path + ".augment", {"sigma_weak", "sigma_strong", "drop_rate"});
    a.sigma_weak = get_or(g, path, "sigma_weak", a.sigma_weak);
    a.sigma_strong = get_or(g, path, "sigma_strong", a.sigma_strong);
    a.drop_rate = get_or(g, path, "drop_rate", a.drop_rate);
    if (a.drop_rate < 0.0 || a.drop_rate >= 1.0) bad(path + ".augment.drop_rate", "in [0, 1)");
  }
  if (j.contains("mixup")) {
    const auto& m = j.at("mixup");
    check_keys(m, path + ".mixup", {"alpha", "beta"});
    a.mix_alpha = get_or(m, path, "alpha", a.mix_alpha);
    a.mix_beta = get_or(m, path, "beta", a.mix_beta);
    if (a.mix_alpha <= 0.0 || a.mix_beta <= 0.0) bad(path + ".mixup", "must be positive");
  }
  if (a.epochs < 1) bad(path + ".epochs", "must be >= 1");
  if (a.batch_labeled < 1 || a.batch_unlabeled < 1) bad(path + ".batch", "must be >= 1");
}

void parse_ablation(const json& j, RunConfig& cfg) {
  const std::string path = "ablation";
  check_keys(j, path, {"proto_align", "inter_consistency", "intra_consistency", "mixup",
                       "pseudo_labels", "pseudo_add", "pseudo_mix_check", "pseudo_revoke"});
  auto& a = cfg.adapt.ablation;
  a.proto_align = get_or(j, path, "proto_align", a.proto_align);
  a.inter_consistency = get_or(j, path, "inter_consistency", a.inter_consistency);
  a.intra_consistency = get_or(j, path, "intra_consistency", a.intra_consistency);
  a.mixup = get_or(j, path, "mixup", a.mixup);
  a.pseudo_labels = get_or(j, path, "pseudo_labels", a.pseudo_labels);
  a.pseudo_add = get_or(j, path, "pseudo_add", a.pseudo_add);
  a.pseudo_mix_check = get_or(j, path, "pseudo_mix_check", a.pseudo_mix_check);
  a.pseudo_revoke = get_or(j, path, "pseudo_revoke", a.pseudo_revoke);
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.source_spec.n = 2000;
  cfg.source_spec.input_dim = 32;
  cfg.source_spec.classes = 5;
  // class balance borrowed from a clinical grade distribution
  cfg.source_spec.proportions = {0.3217, 0.1964, 0.2557, 0.0877, 0.1385};
  cfg.source_spec.class_sigma = 0.35;

  cfg.target_spec = cfg.source_spec;
  cfg.target_spec.n = 2000;
  cfg.target_spec.shift.rotations = {{0, 1, 0.5}, {1, 2, 0.4}, {2, 3, 0.3}};
  cfg.target_spec.shift.scale = 1.15;
  cfg.target_spec.shift.offset = 0.4;
  cfg.target_spec.shift.noise_sigma = 0.15;
  cfg.target_spec.outlier_fraction = 0.05;

  cfg.net.input_dim = 32;
  cfg.net.feature_dim = 16;
  cfg.net.hidden = {64, 64};
  cfg.net.classes = 5;
  cfg.net.noise_dim = 16;
  cfg.net.embed_dim = 8;
  cfg.net.generator_hidden = {64, 64};

  finalize(cfg);
  return cfg;
}

void finalize(RunConfig& cfg) {
  cfg.net.input_dim = cfg.source_spec.input_dim;
  cfg.net.classes = cfg.source_spec.classes;
  cfg.adapt.budget_total = static_cast<std::size_t>(
      std::llround(cfg.budget_fraction * static_cast<double>(cfg.target_spec.n)));
  if (cfg.adapt.active_round_epochs.size() != static_cast<std::size_t>(cfg.rounds)) {
    cfg.adapt.active_round_epochs.clear();
    for (int r = 0; r < cfg.rounds; ++r) cfg.adapt.active_round_epochs.push_back(r);
  }
}

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg = default_config();
  check_keys(j, "", {"schema_version", "label", "seed", "data", "model", "optimizer", "source",
                     "active", "adapt", "ablation"});
  if (!j.contains("schema_version")) bad("schema_version", "missing");
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != 1) bad("schema_version", "unsupported version");
  cfg.label = get_or<std::string>(j, "", "label", cfg.label);
  cfg.seed = get_or<std::uint64_t>(j, "", "seed", cfg.seed);
  if (j.contains("data")) parse_data(j.at("data"), cfg);
  if (j.contains("model")) parse_model(j.at("model"), cfg);
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), cfg);
  if (j.contains("source")) parse_source(j.at("source"), cfg);
  if (j.contains("active")) parse_active(j.at("active"), cfg);
  if (j.contains("adapt")) parse_adapt(j.at("adapt"), cfg);
  if (j.contains("ablation")) parse_ablation(j.at("ablation"), cfg);
  finalize(cfg);
  if (cfg.adapt.budget_total < static_cast<std::size_t>(cfg.rounds)) {
    bad("active.budget_fraction", "budget smaller than the number of rounds");
  }
  for (int e : cfg.adapt.active_round_epochs) {
    if (e < 0 || e >= cfg.adapt.epochs) bad("active.round_epochs", "epoch outside the schedule");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["label"] = cfg.label;
  j["seed"] = cfg.seed;

  nlohmann::json data;
  data["n_source"] = cfg.source_spec.n;
  data["n_target"] = cfg.target_spec.n;
  data["input_dim"] = cfg.source_spec.input_dim;
  data["classes"] = cfg.source_spec.classes;
  data["proportions"] = cfg.source_spec.proportions;
  data["class_sigma"] = cfg.source_spec.class_sigma;
  data["tangent_sigma_scale"] = cfg.source_spec.tangent_sigma_scale;
  data["curve"] = {{"radius", cfg.source_spec.curve.radius},
                   {"angle_step", cfg.source_spec.curve.angle_step},
                   {"pitch", cfg.source_spec.curve.pitch}};
  nlohmann::json rot = nlohmann::json::array();
  for (const auto& r : cfg.target_spec.shift.rotations) {
    rot.push_back({r.axis_a, r.axis_b, r.angle});
  }
  data["shift"] = {{"rotations", rot},
                   {"scale", cfg.target_spec.shift.scale},
                   {"offset", cfg.target_spec.shift.offset},
                   {"noise_sigma", cfg.target_spec.shift.noise_sigma}};
  data["outlier_fraction"] = cfg.target_spec.outlier_fraction;
  data["outlier_box_sigmas"] = cfg.target_spec.outlier_box_sigmas;
  j["data"] = data;

  j["model"] = {{"feature_dim", cfg.net.feature_dim},
                {"hidden", cfg.net.hidden},
                {"noise_dim", cfg.net.noise_dim},
                {"embed_dim", cfg.net.embed_dim},
                {"generator_hidden", cfg.net.generator_hidden}};
  j["optimizer"] = {{"rho", cfg.adapt.optimizer.rho},
                    {"epsilon", cfg.adapt.optimizer.epsilon},
                    {"lr", cfg.adapt.optimizer.lr}};
  j["source"] = {{"epochs_model", cfg.stage1.epochs_model},
                 {"epochs_generator", cfg.stage1.epochs_generator},
                 {"batch", cfg.stage1.batch},
                 {"contrastive",
                  {{"tau", cfg.stage1.contrastive.tau},
                   {"gamma", cfg.stage1.contrastive.gamma},
                   {"beta0", cfg.stage1.contrastive.beta0},
                   {"weight", cfg.stage1.contrastive_weight}}}};
  j["active"] = {{"budget_fraction", cfg.budget_fraction},
                 {"rounds", cfg.rounds},
                 {"neighbors", cfg.adapt.k_nn},
                 {"kernel",
                  {{"kind", cfg.adapt.kernel.kind == KernelSpec::Kind::Rbf ? "rbf" : "linear"},
                   {"bandwidth", cfg.adapt.kernel.bandwidth}}},
                 {"strategy", cfg.adapt.matching_selection ? "matching" : "random"},
                 {"round_epochs", cfg.adapt.active_round_epochs}};
  j["adapt"] = {{"epochs", cfg.adapt.epochs},
                {"batch_labeled", cfg.adapt.batch_labeled},
                {"batch_unlabeled", cfg.adapt.batch_unlabeled},
                {"weights",
                 {{"proto_align", cfg.adapt.weights.proto_align},
                  {"inter", cfg.adapt.weights.inter},
                  {"intra", cfg.adapt.weights.intra},
                  {"mix", cfg.adapt.weights.mix}}},
                {"proto_tau", cfg.adapt.proto_tau},
                {"transport",
                 {{"epsilon", cfg.adapt.ot_epsilon},
                  {"max_iters", cfg.adapt.ot_max_iters},
                  {"tol", cfg.adapt.ot_tol},
                  {"tau_scale", cfg.adapt.tau_scale},
                  {"marginal", cfg.adapt.estimated_marginal ? "estimated" : "uniform"}}},
                {"pseudo",
                 {{"phi_a", cfg.adapt.thresholds.phi_a},
                  {"phi_b", cfg.adapt.thresholds.phi_b},
                  {"top_k", cfg.adapt.thresholds.top_k},
                  {"start_epoch", cfg.adapt.pseudo_start_epoch}}},
                {"ema",
                 {{"prototype", cfg.adapt.prototype_ema},
                  {"feature_bank", cfg.adapt.feature_bank_ema}}},
                {"augment",
                 {{"sigma_weak", cfg.adapt.sigma_weak},
                  {"sigma_strong", cfg.adapt.sigma_strong},
                  {"drop_rate", cfg.adapt.drop_rate}}},
                {"mixup", {{"alpha", cfg.adapt.mix_alpha}, {"beta", cfg.adapt.mix_beta}}},
                {"prototype_batch", cfg.adapt.prototype_batch}};
  j["ablation"] = {{"proto_align", cfg.adapt.ablation.proto_align},
                   {"inter_consistency", cfg.adapt.ablation.inter_consistency},
                   {"intra_consistency", cfg.adapt.ablation.intra_consistency},
                   {"mixup", cfg.adapt.ablation.mixup},
                   {"pseudo_labels", cfg.adapt.ablation.pseudo_labels},
                   {"pseudo_add", cfg.adapt.ablation.pseudo_add},
                   {"pseudo_mix_check", cfg.adapt.ablation.pseudo_mix_check},
                   {"pseudo_revoke", cfg.adapt.ablation.pseudo_revoke}};
  return j;
}

namespace {

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

std::string config_hash(const RunConfig& cfg) { return fnv_hex(config_to_json(cfg).dump()); }

std::string dataset_hash(const RunConfig& cfg) {
  return fnv_hex(config_to_json(cfg).at("data").dump());
}

}  // namespace gradapt
