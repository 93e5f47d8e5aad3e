#include "gradapt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gradapt/kernels.hpp"
#include "gradapt/numio.hpp"

namespace gradapt {

namespace {

std::vector<double> effective_proportions(const DomainSpec& spec) {
  if (spec.proportions.empty()) {
    return std::vector<double>(spec.classes, 1.0 / static_cast<double>(spec.classes));
  }
  if (spec.proportions.size() != spec.classes) {
    throw std::invalid_argument("spec: proportions size must equal classes");
  }
  double total = 0.0;
  for (double p : spec.proportions) {
    if (p < 0.0) throw std::invalid_argument("spec: negative class proportion");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("spec: proportions must sum to 1");
  return spec.proportions;
}

void validate(const DomainSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("spec: n must be positive");
  if (spec.classes < 2) throw std::invalid_argument("spec: need at least two classes");
  if (spec.input_dim < 3) throw std::invalid_argument("spec: input_dim must be at least 3");
  if (spec.class_sigma < 0.0 || !std::isfinite(spec.class_sigma)) {
    throw std::invalid_argument("spec: degenerate class covariance");
  }
  if (spec.outlier_fraction < 0.0 || spec.outlier_fraction > 0.2) {
    throw std::invalid_argument("spec: outlier fraction outside [0, 0.2]");
  }
  // keeps mean distances strictly increasing in the grade gap
  if (spec.curve.angle_step * static_cast<double>(spec.classes - 1) > 3.14159265358979) {
    throw std::invalid_argument("spec: helix arc exceeds pi, ordinal geometry would fold back");
  }
  (void)effective_proportions(spec);
}

// Largest-remainder split of n into class counts.
std::vector<std::size_t> class_counts(std::size_t n, const std::vector<double>& proportions) {
  const std::size_t k = proportions.size();
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> fractions(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = proportions[c] * static_cast<double>(n);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    fractions[c] = {exact - std::floor(exact), c};
    assigned += counts[c];
  }
  std::stable_sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) counts[fractions[r % k].second]++;
  return counts;
}

void apply_shift(const ShiftSpec& shift, std::size_t dim, std::vector<double>& x) {
  for (const auto& rot : shift.rotations) {
    if (rot.axis_a >= dim || rot.axis_b >= dim || rot.axis_a == rot.axis_b) {
      throw std::invalid_argument("shift: bad rotation plane");
    }
    const double c = std::cos(rot.angle);
    const double s = std::sin(rot.angle);
    const double a = x[rot.axis_a];
    const double b = x[rot.axis_b];
    x[rot.axis_a] = c * a - s * b;
    x[rot.axis_b] = s * a + c * b;
  }
  for (auto& v : x) v = shift.scale * v + shift.offset;
}

}  // namespace

std::vector<std::vector<double>> curve_class_means(const DomainSpec& spec) {
  std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.input_dim, 0.0));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double theta = spec.curve.angle_step * static_cast<double>(c);
    means[c][0] = spec.curve.radius * std::cos(theta);
    means[c][1] = spec.curve.radius * std::sin(theta);
    means[c][2] = spec.curve.pitch * theta;
  }
  return means;
}

namespace {

// Unit tangent of the helix at a class position.
std::vector<double> curve_tangent(const DomainSpec& spec, std::size_t c) {
  std::vector<double> t(spec.input_dim, 0.0);
  const double theta = spec.curve.angle_step * static_cast<double>(c);
  t[0] = -spec.curve.radius * std::sin(theta);
  t[1] = spec.curve.radius * std::cos(theta);
  t[2] = spec.curve.pitch;
  const double norm = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
  for (auto& v : t) v /= norm;
  return t;
}

// Isotropic draw stretched along the class tangent.
void add_class_noise(const DomainSpec& spec, const std::vector<double>& tangent, Rng& rng,
                     std::vector<double>& x) {
  std::vector<double> g(spec.input_dim);
  for (auto& v : g) v = rng.normal();
  if (spec.tangent_sigma_scale != 1.0) {
    double along = 0.0;
    for (std::size_t i = 0; i < spec.input_dim; ++i) along += g[i] * tangent[i];
    const double stretch = (spec.tangent_sigma_scale - 1.0) * along;
    for (std::size_t i = 0; i < spec.input_dim; ++i) g[i] += stretch * tangent[i];
  }
  for (std::size_t i = 0; i < spec.input_dim; ++i) x[i] += spec.class_sigma * g[i];
}

}  // namespace

int LabelOracle::label(int id) {
  ++total_calls_;
  if (id < 0 || static_cast<std::size_t>(id) >= data_->labels.size()) {
    throw std::out_of_range("oracle: unknown sample id");
  }
  queried_.insert(id);
  return data_->labels[static_cast<std::size_t>(id)];
}

Dataset make_source(const DomainSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto proportions = effective_proportions(spec);
  const auto counts = class_counts(spec.n, proportions);
  const auto means = curve_class_means(spec);

  Rng rng = Rng::stream(seed, "data.source");
  Dataset data;
  data.input_dim = spec.input_dim;
  data.classes = spec.classes;
  data.class_means = means;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const auto tangent = curve_tangent(spec, c);
    for (std::size_t i = 0; i < counts[c]; ++i) {
      std::vector<double> x = means[c];
      add_class_noise(spec, tangent, rng, x);
      data.x.push_back(std::move(x));
      data.labels.push_back(static_cast<int>(c));
    }
  }
  // interleave classes
  std::vector<std::size_t> order(data.x.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Dataset shuffled;
  shuffled.input_dim = data.input_dim;
  shuffled.classes = data.classes;
  shuffled.class_means = data.class_means;
  for (std::size_t idx : order) {
    shuffled.x.push_back(std::move(data.x[idx]));
    shuffled.labels.push_back(data.labels[idx]);
  }
  shuffled.outlier.assign(shuffled.x.size(), false);
  return shuffled;
}

Dataset make_target(const DomainSpec& spec, const DomainSpec& source_spec, std::uint64_t seed) {
  validate(spec);
  validate(source_spec);
  if (spec.input_dim != source_spec.input_dim || spec.classes != source_spec.classes) {
    throw std::invalid_argument("make_target: source/target dimension mismatch");
  }
  if (spec.shift.scale == 0.0) throw std::invalid_argument("make_target: singular shift");

  const auto proportions = effective_proportions(spec);
  const auto counts = class_counts(spec.n, proportions);
  const auto source_means = curve_class_means(source_spec);

  Rng rng = Rng::stream(seed, "data.target");
  Dataset data;
  data.input_dim = spec.input_dim;
  data.classes = spec.classes;

  // shifted class means, also used to label outliers
  for (const auto& m : source_means) {
    auto shifted = m;
    apply_shift(spec.shift, spec.input_dim, shifted);
    data.class_means.push_back(std::move(shifted));
  }

  for (std::size_t c = 0; c < spec.classes; ++c) {
    const auto tangent = curve_tangent(source_spec, c);
    for (std::size_t i = 0; i < counts[c]; ++i) {
      std::vector<double> x = source_means[c];
      add_class_noise(source_spec, tangent, rng, x);
      apply_shift(spec.shift, spec.input_dim, x);
      for (auto& v : x) v += spec.shift.noise_sigma * rng.normal();
      data.x.push_back(std::move(x));
      data.labels.push_back(static_cast<int>(c));
    }
  }

  std::vector<std::size_t> order(data.x.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Dataset shuffled;
  shuffled.input_dim = data.input_dim;
  shuffled.classes = data.classes;
  shuffled.class_means = data.class_means;
  for (std::size_t idx : order) {
    shuffled.x.push_back(std::move(data.x[idx]));
    shuffled.labels.push_back(data.labels[idx]);
  }
  shuffled.outlier.assign(shuffled.x.size(), false);

  // far-field outliers replace a fixed prefix of the shuffled order
  const auto n_out = static_cast<std::size_t>(
      std::llround(spec.outlier_fraction * static_cast<double>(spec.n)));
  if (n_out > 0) {
    std::vector<double> center(spec.input_dim, 0.0);
    for (const auto& m : shuffled.class_means) {
      kern::axpy(1.0 / static_cast<double>(spec.classes), m.data(), center.data(),
                 spec.input_dim);
    }
    const double half_width =
        0.5 * spec.outlier_box_sigmas * source_spec.class_sigma * std::fabs(spec.shift.scale);
    for (std::size_t i = 0; i < n_out; ++i) {
      std::vector<double> x(spec.input_dim);
      for (std::size_t dd = 0; dd < spec.input_dim; ++dd) {
        x[dd] = center[dd] + rng.uniform(-half_width, half_width);
      }
      // hidden label: nearest shifted class mean
      int best = 0;
      double best_d = kern::squared_distance(x.data(), shuffled.class_means[0].data(),
                                             spec.input_dim);
      for (std::size_t c = 1; c < spec.classes; ++c) {
        const double d =
            kern::squared_distance(x.data(), shuffled.class_means[c].data(), spec.input_dim);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      shuffled.x[i] = std::move(x);
      shuffled.labels[i] = best;
      shuffled.outlier[i] = true;
    }
  }
  return shuffled;
}

void export_dataset(const Dataset& data, const std::string& features_path,
                    const std::string& labels_path) {
  std::ofstream feat(features_path);
  if (!feat) throw std::runtime_error("export_dataset: cannot write " + features_path);
  feat << "id";
  for (std::size_t d = 0; d < data.input_dim; ++d) feat << ",f" << d;
  feat << "\n";
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    feat << i;
    for (std::size_t d = 0; d < data.input_dim; ++d) feat << "," << format_double(data.x[i][d]);
    feat << "\n";
  }

  std::ofstream lab(labels_path);
  if (!lab) throw std::runtime_error("export_dataset: cannot write " + labels_path);
  lab << "id,label,outlier\n";
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    lab << i << "," << data.labels[i] << "," << (data.outlier[i] ? 1 : 0) << "\n";
  }
}

Dataset import_dataset(const std::string& features_path, const std::string& labels_path) {
  std::ifstream feat(features_path);
  if (!feat) throw std::runtime_error("import_dataset: cannot read " + features_path);
  Dataset data;
  std::string line;
  if (!std::getline(feat, line)) throw std::runtime_error("import_dataset: empty feature file");
  {
    std::size_t cols = 0;
    for (char ch : line) {
      if (ch == ',') ++cols;
    }
    data.input_dim = cols;
  }
  while (std::getline(feat, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // id
    std::vector<double> x;
    x.reserve(data.input_dim);
    while (std::getline(ss, field, ',')) x.push_back(parse_double(field));
    if (x.size() != data.input_dim) throw std::runtime_error("import_dataset: ragged row");
    data.x.push_back(std::move(x));
  }

  std::ifstream lab(labels_path);
  if (!lab) throw std::runtime_error("import_dataset: cannot read " + labels_path);
  std::getline(lab, line);  // header
  int max_label = 0;
  while (std::getline(lab, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    std::getline(ss, field, ',');
    const int label = std::stoi(field);
    max_label = std::max(max_label, label);
    data.labels.push_back(label);
    std::getline(ss, field, ',');
    data.outlier.push_back(field == "1");
  }
  if (data.labels.size() != data.x.size()) {
    throw std::runtime_error("import_dataset: feature/label row mismatch");
  }
  data.classes = static_cast<std::size_t>(max_label) + 1;
  return data;
}

}  // namespace gradapt
