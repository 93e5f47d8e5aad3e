#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gradapt/nets.hpp"
#include "gradapt/stage_source.hpp"

// Checkpoints: one JSON header line with shapes and provenance, then one CSV
// block per tensor. Values are written in shortest round-trip form, so a
// save/load cycle is bit-exact.

namespace gradapt {

void save_tensors(const std::string& path, const std::string& kind,
                  const std::vector<std::pair<std::string, Tensor*>>& tensors,
                  const FileMeta& meta);

struct CheckpointData {
  std::string kind;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& find(const std::string& name) const;
};

CheckpointData load_tensors(const std::string& path);

// Model-level wrappers; loading validates shapes against the constructed nets.
void save_model(const std::string& path, EncoderParams& enc, ClassifierParams& cls,
                const FileMeta& meta);
void load_model(const std::string& path, EncoderParams& enc, ClassifierParams& cls);
void save_generator(const std::string& path, GeneratorParams& gen, const FileMeta& meta);
void load_generator(const std::string& path, GeneratorParams& gen);

}  // namespace gradapt
