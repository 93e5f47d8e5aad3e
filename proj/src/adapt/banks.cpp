#include "gradapt/banks.hpp"

#include <stdexcept>

#include "gradapt/kernels.hpp"

namespace gradapt {

PrototypeBank make_prototype_bank(std::size_t classes, std::size_t feature_dim, double ema) {
  PrototypeBank bank;
  bank.prototypes.assign(classes, std::vector<double>(feature_dim, 0.0));
  bank.ema = ema;
  return bank;
}

std::vector<int> update_prototypes(PrototypeBank& bank,
                                   const std::map<int, std::vector<double>>& class_means) {
  std::vector<int> updated;
  for (const auto& [cls, mean] : class_means) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= bank.prototypes.size()) {
      throw std::invalid_argument("update_prototypes: class out of range");
    }
    auto& proto = bank.prototypes[static_cast<std::size_t>(cls)];
    if (mean.size() != proto.size()) {
      throw std::invalid_argument("update_prototypes: dimension mismatch");
    }
    if (!bank.initialized) {
      proto = mean;
    } else {
      for (std::size_t i = 0; i < proto.size(); ++i) {
        proto[i] = bank.ema * proto[i] + (1.0 - bank.ema) * mean[i];
      }
    }
    updated.push_back(cls);
  }
  if (!updated.empty()) bank.initialized = true;
  return updated;
}

FeatureBank make_feature_bank(std::size_t n, std::size_t dim, double ema) {
  FeatureBank bank;
  bank.entries.assign(n, std::vector<double>(dim, 0.0));
  bank.fresh.assign(n, 0);
  bank.ema = ema;
  return bank;
}

void refresh_all(FeatureBank& bank, const std::vector<LocalRepr>& lrs) {
  if (lrs.size() != bank.entries.size()) {
    throw std::invalid_argument("refresh_all: size mismatch");
  }
  for (std::size_t i = 0; i < lrs.size(); ++i) {
    bank.entries[i] = lrs[i].v;
    bank.fresh[i] = 1;
  }
}

void ema_update(FeatureBank& bank, int id, const std::vector<double>& value) {
  auto& e = bank.entries[static_cast<std::size_t>(id)];
  if (value.size() != e.size()) throw std::invalid_argument("ema_update: dimension mismatch");
  if (!bank.fresh[static_cast<std::size_t>(id)]) {
    e = value;
    bank.fresh[static_cast<std::size_t>(id)] = 1;
    return;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = bank.ema * e[i] + (1.0 - bank.ema) * value[i];
  }
}

}  // namespace gradapt
