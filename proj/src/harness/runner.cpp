#include "gradapt/runner.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gradapt/checkpoint.hpp"

namespace gradapt {

namespace fs = std::filesystem;

namespace {

FileMeta meta_for(const RunConfig& cfg) { return {config_hash(cfg), cfg.seed}; }

SourceTrainResult stage_one(const RunConfig& cfg, const Dataset& source) {
  return pretrain_source(source, cfg.stage1, cfg.net, cfg.seed);
}

void write_stage1_json(const SourceTrainResult& res, const RunConfig& cfg,
                       const std::string& out_dir) {
  nlohmann::json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["loss_trace"] = res.loss_trace;
  j["ce_trace"] = res.ce_trace;
  j["train_accuracy"] = res.final_train_accuracy;
  std::ofstream out(fs::path(out_dir) / "stage1.json");
  if (!out) throw std::runtime_error("runner: cannot write stage1.json");
  out << j.dump(2) << "\n";
}

FullRunResult finish_run(const RunConfig& cfg, SourceTrainResult stage1,
                         GeneratorTrainResult gen, const Dataset& target,
                         const std::string& out_dir) {
  FullRunResult run;
  run.config = cfg;
  run.source_only = evaluate_model(stage1.encoder, stage1.classifier, target);
  run.stage1_loss_trace = stage1.loss_trace;
  run.stage1_ce_trace = stage1.ce_trace;
  run.stage1_train_accuracy = stage1.final_train_accuracy;

  LabelOracle oracle(&target);
  run.adapt = adapt(stage1.encoder, stage1.classifier, gen.generator, target, oracle, cfg.adapt,
                    cfg.net, cfg.seed);
  run.roc = roc_auc(run.adapt.final_scores, target.labels);

  fs::create_directories(out_dir);
  save_model((fs::path(out_dir) / "adapted_model.ckpt").string(), run.adapt.encoder,
             run.adapt.classifier, meta_for(cfg));
  write_report(run, out_dir);

  // feature dumps for external plotting
  {
    std::vector<std::vector<double>> feats;
    feats.reserve(target.x.size());
    for (const auto& x : target.x) feats.push_back(encode(run.adapt.encoder, x));
    export_features(feats, target.labels, "target", meta_for(cfg),
                    (fs::path(out_dir) / "features_target.csv").string());
  }
  {
    Rng rng = Rng::stream(cfg.seed, "export.generator");
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    for (std::size_t c = 0; c < cfg.net.classes; ++c) {
      for (int s = 0; s < 40; ++s) {
        std::vector<double> noise(cfg.net.noise_dim);
        for (auto& v : noise) v = rng.normal();
        feats.push_back(generate(gen.generator, noise, static_cast<int>(c)));
        labels.push_back(static_cast<int>(c));
      }
    }
    export_features(feats, labels, "generator", meta_for(cfg),
                    (fs::path(out_dir) / "features_generator.csv").string());
  }
  return run;
}

}  // namespace

void run_pretrain_source(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto source = make_source(cfg.source_spec, cfg.seed);
  auto res = stage_one(cfg, source);
  save_model((fs::path(out_dir) / "source_model.ckpt").string(), res.encoder, res.classifier,
             meta_for(cfg));
  write_stage1_json(res, cfg, out_dir);
}

void run_train_generator(const RunConfig& cfg, const std::string& model_path,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  Rng dummy(0);
  EncoderParams enc = make_encoder(cfg.net, dummy);
  ClassifierParams cls = make_classifier(cfg.net, dummy);
  load_model(model_path, enc, cls);
  cls.frozen = true;
  auto gen = train_generator(cls, cfg.stage1, cfg.net, cfg.seed);
  save_generator((fs::path(out_dir) / "generator.ckpt").string(), gen.generator, meta_for(cfg));
  nlohmann::json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["loss_trace_tail"] = std::vector<double>(
      gen.loss_trace.end() - std::min<std::size_t>(50, gen.loss_trace.size()),
      gen.loss_trace.end());
  std::ofstream out(fs::path(out_dir) / "generator.json");
  out << j.dump(2) << "\n";
}

FullRunResult run_adapt(const RunConfig& cfg, const std::string& model_path,
                        const std::string& generator_path, const std::string& out_dir) {
  Rng dummy(0);
  SourceTrainResult stage1;
  stage1.encoder = make_encoder(cfg.net, dummy);
  stage1.classifier = make_classifier(cfg.net, dummy);
  load_model(model_path, stage1.encoder, stage1.classifier);
  GeneratorTrainResult gen;
  gen.generator = make_generator(cfg.net, dummy);
  load_generator(generator_path, gen.generator);

  const auto target = make_target(cfg.target_spec, cfg.source_spec, cfg.seed);
  return finish_run(cfg, std::move(stage1), std::move(gen), target, out_dir);
}

FullRunResult run_all(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto source = make_source(cfg.source_spec, cfg.seed);
  const auto target = make_target(cfg.target_spec, cfg.source_spec, cfg.seed);

  auto stage1 = stage_one(cfg, source);
  save_model((fs::path(out_dir) / "source_model.ckpt").string(), stage1.encoder,
             stage1.classifier, meta_for(cfg));
  write_stage1_json(stage1, cfg, out_dir);

  stage1.classifier.frozen = true;
  auto gen = train_generator(stage1.classifier, cfg.stage1, cfg.net, cfg.seed);
  save_generator((fs::path(out_dir) / "generator.ckpt").string(), gen.generator, meta_for(cfg));

  stage1.classifier.frozen = false;
  return finish_run(cfg, std::move(stage1), std::move(gen), target, out_dir);
}

void run_evaluate(const RunConfig& cfg, const std::string& model_path,
                  const std::string& out_dir) {
  fs::create_directories(out_dir);
  Rng dummy(0);
  EncoderParams enc = make_encoder(cfg.net, dummy);
  ClassifierParams cls = make_classifier(cfg.net, dummy);
  load_model(model_path, enc, cls);

  const auto target = make_target(cfg.target_spec, cfg.source_spec, cfg.seed);
  const auto ev = evaluate_model(enc, cls, target);
  const auto roc = roc_auc(ev.scores, target.labels);

  nlohmann::json j;
  j["config_hash"] = config_hash(cfg);
  j["dataset_hash"] = dataset_hash(cfg);
  j["seed"] = cfg.seed;
  j["accuracy"] = ev.accuracy;
  j["macro_f1"] = ev.macro_f1;
  j["kappa"] = ev.kappa;
  j["qwk"] = ev.qwk;
  j["macro_auc"] = roc.macro_auc;
  nlohmann::json cm_rows = nlohmann::json::array();
  for (std::size_t r = 0; r < ev.confusion.classes; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < ev.confusion.classes; ++c) row.push_back(ev.confusion.at(r, c));
    cm_rows.push_back(row);
  }
  j["confusion"] = cm_rows;
  std::ofstream out(fs::path(out_dir) / "evaluation.json");
  if (!out) throw std::runtime_error("runner: cannot write evaluation.json");
  out << j.dump(2) << "\n";
}

void run_export_features(const RunConfig& cfg, const std::string& model_path,
                         const std::string& generator_path, const std::string& what,
                         const std::string& tag, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto path = (fs::path(out_dir) / ("features_" + tag + ".csv")).string();
  Rng dummy(0);
  if (what == "generator") {
    GeneratorParams gen = make_generator(cfg.net, dummy);
    load_generator(generator_path, gen);
    Rng rng = Rng::stream(cfg.seed, "export.generator");
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    for (std::size_t c = 0; c < cfg.net.classes; ++c) {
      for (int s = 0; s < 40; ++s) {
        std::vector<double> noise(cfg.net.noise_dim);
        for (auto& v : noise) v = rng.normal();
        feats.push_back(generate(gen, noise, static_cast<int>(c)));
        labels.push_back(static_cast<int>(c));
      }
    }
    export_features(feats, labels, tag, meta_for(cfg), path);
    return;
  }
  EncoderParams enc = make_encoder(cfg.net, dummy);
  ClassifierParams cls = make_classifier(cfg.net, dummy);
  load_model(model_path, enc, cls);
  const Dataset data = what == "source" ? make_source(cfg.source_spec, cfg.seed)
                                        : make_target(cfg.target_spec, cfg.source_spec, cfg.seed);
  std::vector<std::vector<double>> feats;
  feats.reserve(data.x.size());
  for (const auto& x : data.x) feats.push_back(encode(enc, x));
  export_features(feats, data.labels, tag, meta_for(cfg), path);
}

}  // namespace gradapt
