#include "gradapt/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gradapt/numio.hpp"

namespace gradapt {

void save_tensors(const std::string& path, const std::string& kind,
                  const std::vector<std::pair<std::string, Tensor*>>& tensors,
                  const FileMeta& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  nlohmann::json header;
  header["kind"] = kind;
  header["schema_version"] = 1;
  header["config"] = meta.config_hash;
  header["seed"] = meta.seed;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [name, t] : tensors) {
    list.push_back({{"name", name}, {"shape", t->shape}});
  }
  header["tensors"] = list;
  out << header.dump() << "\n";
  for (const auto& [name, t] : tensors) {
    out << "BLOCK " << name << "\n";
    const std::size_t cols = t->shape.size() == 2 ? t->shape[1] : t->size();
    const std::size_t rows = cols > 0 ? t->size() / cols : 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c > 0) out << ",";
        out << format_double(t->values[r * cols + c]);
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

const Tensor& CheckpointData::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

CheckpointData load_tensors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: empty file " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint: bad header in " + path + ": " + e.what());
  }
  CheckpointData data;
  data.kind = header.at("kind").get<std::string>();
  data.config_hash = header.at("config").get<std::string>();
  data.seed = header.at("seed").get<std::uint64_t>();

  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (!std::getline(in, line) || line != "BLOCK " + name) {
      throw std::runtime_error("checkpoint: expected block " + name);
    }
    Tensor t = Tensor::zeros(shape);
    const std::size_t cols = shape.size() == 2 ? shape[1] : t.size();
    const std::size_t rows = cols > 0 ? t.size() / cols : 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated " + name);
      std::stringstream ss(line);
      std::string field;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!std::getline(ss, field, ',')) {
          throw std::runtime_error("checkpoint: short row in " + name);
        }
        t.values[r * cols + c] = parse_double(field);
      }
    }
    data.tensors.emplace_back(name, std::move(t));
  }
  return data;
}

void save_model(const std::string& path, EncoderParams& enc, ClassifierParams& cls,
                const FileMeta& meta) {
  auto tensors = named_parameters(enc, "encoder");
  const auto ct = named_parameters(cls, "classifier");
  tensors.insert(tensors.end(), ct.begin(), ct.end());
  save_tensors(path, "model", tensors, meta);
}

namespace {

void assign_into(const CheckpointData& data,
                 const std::vector<std::pair<std::string, Tensor*>>& targets) {
  for (const auto& [name, t] : targets) {
    const Tensor& loaded = data.find(name);
    if (loaded.shape != t->shape) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    t->values = loaded.values;
  }
}

}  // namespace

void load_model(const std::string& path, EncoderParams& enc, ClassifierParams& cls) {
  const auto data = load_tensors(path);
  if (data.kind != "model") throw std::runtime_error("checkpoint: not a model file: " + path);
  auto targets = named_parameters(enc, "encoder");
  const auto ct = named_parameters(cls, "classifier");
  targets.insert(targets.end(), ct.begin(), ct.end());
  assign_into(data, targets);
}

void save_generator(const std::string& path, GeneratorParams& gen, const FileMeta& meta) {
  save_tensors(path, "generator", named_parameters(gen, "generator"), meta);
}

void load_generator(const std::string& path, GeneratorParams& gen) {
  const auto data = load_tensors(path);
  if (data.kind != "generator") {
    throw std::runtime_error("checkpoint: not a generator file: " + path);
  }
  assign_into(data, named_parameters(gen, "generator"));
}

}  // namespace gradapt
