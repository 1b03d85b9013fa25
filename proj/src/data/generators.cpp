#include "spectre/data/generators.hpp"

#include "spectre/common/rng.hpp"

#include <algorithm>
#include <cmath>

namespace spectre::data {

std::string to_string(Family family) {
  switch (family) {
    case Family::kSynthetic: return "synthetic";
    case Family::kGridworld: return "gridworld";
    case Family::kAdult: return "adult";
    case Family::kFeatures: return "features";
  }
  return "features";
}

Family parse_family(const std::string& text) {
  if (text == "synthetic") return Family::kSynthetic;
  if (text == "gridworld") return Family::kGridworld;
  if (text == "adult") return Family::kAdult;
  if (text == "features") return Family::kFeatures;
  throw InvalidInput("unknown dataset family '" + text + "'");
}

const std::vector<std::string>& variants_of(Family family) {
  static const std::vector<std::string> synthetic{"regular", "confounder", "newvar", "mechanism", "interaction"};
  static const std::vector<std::string> gridworld{"regular", "newobj", "mechanism"};
  static const std::vector<std::string> adult{"regular", "newvar", "mechanism", "confounder"};
  static const std::vector<std::string> any;
  switch (family) {
    case Family::kSynthetic: return synthetic;
    case Family::kGridworld: return gridworld;
    case Family::kAdult: return adult;
    case Family::kFeatures: return any;
  }
  return any;
}

void validate_variant(Family family, const std::string& variant) {
  const auto& allowed = variants_of(family);
  if (family == Family::kFeatures) {
    if (variant.empty()) throw InvalidInput("feature-table variant name is empty");
    return;
  }
  if (std::find(allowed.begin(), allowed.end(), variant) == allowed.end()) {
    throw InvalidInput("variant '" + variant + "' is not defined for " + to_string(family));
  }
}

std::string to_string(NoiseConvention convention) {
  return convention == NoiseConvention::kStdDev ? "stddev" : "variance";
}

NoiseConvention parse_noise_convention(const std::string& text) {
  if (text == "stddev" || text == "std") return NoiseConvention::kStdDev;
  if (text == "variance" || text == "var") return NoiseConvention::kVariance;
  throw InvalidInput("unknown noise convention '" + text + "' (expected stddev or variance)");
}

double noise_stddev(NoiseConvention convention) {
  return convention == NoiseConvention::kStdDev ? 0.3 : std::sqrt(0.3);
}

LabeledDataset gen_synthetic(std::size_t n, const std::string& variant, std::uint64_t seed,
                             const SyntheticOptions& options) {
  validate_variant(Family::kSynthetic, variant);
  if (n == 0) throw InvalidInput("gen_synthetic: n must be positive");
  const double s = noise_stddev(options.noise);
  const bool confounder = variant == "confounder";
  Rng rng(derive_seed(seed, "synthetic", variant));

  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(n), 6);
  for (std::size_t i = 0; i < n; ++i) {
    // Fixed draw order per row keeps every variant aligned with the base stream.
    const double x1 = rng.normal();
    const double u = rng.normal();
    const double e2 = s * rng.normal();
    const double e3 = s * rng.normal();
    const double e4 = s * rng.normal();
    const double e5 = s * rng.normal();
    const double ey = s * rng.normal();
    const double x6 = rng.normal();

    const double x2 = 0.8 * x1 + e2 + (confounder ? 0.6 * u : 0.0);
    const double x3 = -0.5 * x1 + 0.4 * x1 * x1 + e3;
    const double x4 = variant == "mechanism" ? 0.35 * x2 * x2 + e4 : 0.7 * x2 + e4 + (confounder ? 0.6 * u : 0.0);
    const double x5 = std::tanh(0.9 * x3) + e5;
    double y = 0.6 * x4 + 0.5 * x5 + 0.3 * x1 + ey;
    if (variant == "newvar") y += 0.8 * x6;
    if (variant == "interaction") y += 0.5 * x2 * x3;

    out.features.row(static_cast<Eigen::Index>(i)) << x1, x2, x3, x4, x5, y;
  }
  out.meta = DatasetMeta{"synthetic", variant, seed, {"X1", "X2", "X3", "X4", "X5", "Y"}};
  const double threshold = options.label_threshold ? *options.label_threshold : synthetic_median(out);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = out.features(static_cast<Eigen::Index>(i), 5) > threshold ? 1 : 0;
  out.split.assign(n, Split::kTest);
  return out;
}

double synthetic_median(const LabeledDataset& data) {
  std::vector<double> y(data.features.col(5).data(), data.features.col(5).data() + data.rows());
  if (y.empty()) throw InvalidInput("synthetic_median: empty dataset");
  std::sort(y.begin(), y.end());
  const std::size_t mid = y.size() / 2;
  return y.size() % 2 == 1 ? y[mid] : 0.5 * (y[mid - 1] + y[mid]);
}

double gridworld_proximity(int ax, int ay, int ox, int oy) {
  const double dx = ax - ox;
  const double dy = ay - oy;
  return 1.0 / (1.0 + std::sqrt(dx * dx + dy * dy));
}

double gridworld_reward(const std::string& variant, int object_type, double proximity) {
  if (variant == "newobj") return (proximity > 0.3 && proximity <= 0.7) ? 2.0 : -0.5;
  if (variant == "mechanism") {
    if (object_type == 0) return proximity > 0.5 ? 2.0 : 0.1;
    return proximity > 0.5 ? -2.0 : -0.1;
  }
  return object_type == 0 ? 1.5 * proximity : -1.0 * proximity;
}

LabeledDataset gen_gridworld(std::size_t n_steps, const std::string& variant, std::uint64_t seed) {
  validate_variant(Family::kGridworld, variant);
  if (n_steps == 0) throw InvalidInput("gen_gridworld: n_steps must be positive");
  Rng rng(derive_seed(seed, "gridworld", variant));
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(n_steps), 6);
  out.labels.resize(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const int ax = static_cast<int>(rng.index(10));
    const int ay = static_cast<int>(rng.index(10));
    const int ox = static_cast<int>(rng.index(10));
    const int oy = static_cast<int>(rng.index(10));
    const int type = static_cast<int>(rng.index(2));
    const double proximity = gridworld_proximity(ax, ay, ox, oy);
    const double reward = gridworld_reward(variant, type, proximity);
    out.features.row(static_cast<Eigen::Index>(i)) << ax, ay, ox, oy, proximity, reward;
    out.labels[i] = variant == "newobj" ? 0 : type;
  }
  out.meta = DatasetMeta{"gridworld", variant, seed, {"a_x", "a_y", "o_x", "o_y", "proximity", "reward"}};
  out.split.assign(n_steps, Split::kTest);
  return out;
}

}  // namespace spectre::data
