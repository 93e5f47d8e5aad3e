#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gradapt/rng.hpp"

// Synthetic two-domain ordinal benchmark. Class means sit on a helix in the
// first three coordinates, so the distance between class means grows
// strictly with the grade gap; the target domain is an affine shift of the
// source process plus noise and a controllable fraction of far-field
// outliers. Target labels stay hidden behind an audited oracle.

namespace gradapt {

struct CurveSpec {
  double radius = 2.0;
  double angle_step = 0.7;  // (classes-1) * angle_step must stay within pi
  double pitch = 0.5;
};

struct PlaneRotation {
  std::size_t axis_a = 0;
  std::size_t axis_b = 1;
  double angle = 0.0;
};

struct ShiftSpec {
  std::vector<PlaneRotation> rotations;
  double scale = 1.0;   // zero makes the map singular and is rejected
  double offset = 0.0;  // added to every coordinate
  double noise_sigma = 0.0;
};

struct DomainSpec {
  std::size_t n = 2000;
  std::size_t input_dim = 32;
  std::size_t classes = 5;
  std::vector<double> proportions;  // defaults to uniform when empty
  double class_sigma = 0.35;
  // Within-class spread multiplier along the curve tangent: severity varies
  // inside a grade, so classes stretch along the grade direction.
  double tangent_sigma_scale = 1.0;
  CurveSpec curve;
  ShiftSpec shift;                 // applied by make_target only
  double outlier_fraction = 0.0;   // in [0, 0.2]
  double outlier_box_sigmas = 5.0;
};

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t classes = 0;
  std::vector<std::vector<double>> x;
  std::vector<int> labels;       // hidden for targets; training code must not read it
  std::vector<bool> outlier;     // target only
  std::vector<std::vector<double>> class_means;  // in this dataset's space
};

// Ground-truth lookup with a labeling budget audit: repeated queries of one
// id count once.
class LabelOracle {
 public:
  explicit LabelOracle(const Dataset* data) : data_(data) {}

  int label(int id);
  std::size_t distinct_queries() const { return queried_.size(); }
  std::size_t total_calls() const { return total_calls_; }

 private:
  const Dataset* data_;
  std::set<int> queried_;
  std::size_t total_calls_ = 0;
};

std::vector<std::vector<double>> curve_class_means(const DomainSpec& spec);

Dataset make_source(const DomainSpec& spec, std::uint64_t seed);
Dataset make_target(const DomainSpec& spec, const DomainSpec& source_spec, std::uint64_t seed);

// Features and hidden labels travel in separate files; the label file never
// enters the training path.
void export_dataset(const Dataset& data, const std::string& features_path,
                    const std::string& labels_path);
Dataset import_dataset(const std::string& features_path, const std::string& labels_path);

}  // namespace gradapt
