#pragma once

#include <map>
#include <vector>

#include "gradapt/active.hpp"

namespace gradapt {

// EMA-smoothed per-class source prototypes, fed by generator batch means.
struct PrototypeBank {
  std::vector<std::vector<double>> prototypes;  // [classes][feature_dim]
  double ema = 0.99;
  bool initialized = false;
};

PrototypeBank make_prototype_bank(std::size_t classes, std::size_t feature_dim, double ema);

// h_c <- ema * h_c + (1 - ema) * o_c for every class present in the update;
// absent classes keep their prototype. Returns the classes updated. The
// first call seeds the bank with the raw means.
std::vector<int> update_prototypes(PrototypeBank& bank,
                                   const std::map<int, std::vector<double>>& class_means);

// One local-representation entry per target sample, EMA-refreshed as
// batches pass through the adaptation loop.
struct FeatureBank {
  std::vector<std::vector<double>> entries;
  std::vector<char> fresh;
  double ema = 0.9;
};

FeatureBank make_feature_bank(std::size_t n, std::size_t dim, double ema);

// Hard assignment; marks every entry fresh.
void refresh_all(FeatureBank& bank, const std::vector<LocalRepr>& lrs);

// entries[id] <- ema * entries[id] + (1 - ema) * value (hard on first touch).
void ema_update(FeatureBank& bank, int id, const std::vector<double>& value);

}  // namespace gradapt
