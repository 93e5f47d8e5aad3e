#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "gradapt/adapt.hpp"
#include "gradapt/nets.hpp"
#include "gradapt/stage_source.hpp"
#include "gradapt/synth.hpp"

// One experiment's full configuration: data specs, architectures, training
// schedules, thresholds, and ablation switches. JSON in and out with a
// versioned schema; unknown keys are hard errors so typos cannot silently
// change an experiment.

namespace gradapt {

struct RunConfig {
  int schema_version = 1;
  std::string label = "default";
  std::uint64_t seed = 1;

  DomainSpec source_spec;
  DomainSpec target_spec;
  NetConfig net;
  SourceTrainConfig stage1;
  AdaptConfig adapt;

  double budget_fraction = 0.05;
  int rounds = 5;
};

RunConfig default_config();

// Strict parse: every key must be known, every value in range. Errors name
// the offending key path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json config_to_json(const RunConfig& cfg);

// Hash of the canonical config dump (includes the seed).
std::string config_hash(const RunConfig& cfg);
// Hash of the data section only: identifies the data-generating process, so
// runs across seeds of one benchmark share it.
std::string dataset_hash(const RunConfig& cfg);

// Applies derived quantities (budget_total, round epochs) onto adapt.
void finalize(RunConfig& cfg);

}  // namespace gradapt
