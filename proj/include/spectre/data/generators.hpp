#pragma once

#include "spectre/data/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spectre::data {

/// Dataset families and the anomaly variants each accepts.
enum class Family { kSynthetic, kGridworld, kAdult, kFeatures };

std::string to_string(Family family);
Family parse_family(const std::string& text);

/// Variants valid for `family` ("regular" first). Feature-table families
/// accept any name, so an empty list is returned for them.
const std::vector<std::string>& variants_of(Family family);
void validate_variant(Family family, const std::string& variant);

/// How the printed noise scale 0.3 of the synthetic equations is read.
enum class NoiseConvention {
  kStdDev,    // epsilon ~ N(0, 0.3^2)
  kVariance,  // epsilon ~ N(0, 0.3)
};

std::string to_string(NoiseConvention convention);
NoiseConvention parse_noise_convention(const std::string& text);
double noise_stddev(NoiseConvention convention);

struct SyntheticOptions {
  NoiseConvention noise = NoiseConvention::kStdDev;
  /// Label threshold on Y. Unset: the median of Y over this draw (used for
  /// the training generation, whose median then labels every test set).
  std::optional<double> label_threshold;
};

/// Columns X1..X5, Y; label = [Y > threshold]. All rows tagged test.
LabeledDataset gen_synthetic(std::size_t n, const std::string& variant, std::uint64_t seed,
                             const SyntheticOptions& options = {});

/// Median of the Y column of a synthetic dataset.
double synthetic_median(const LabeledDataset& data);

/// Gridworld rewards as functions of proximity.
double gridworld_reward(const std::string& variant, int object_type, double proximity);
double gridworld_proximity(int ax, int ay, int ox, int oy);

/// Columns a_x, a_y, o_x, o_y, proximity, reward; label = object type
/// (A = 0, B = 1; the new object C is labeled 0). All rows tagged test.
LabeledDataset gen_gridworld(std::size_t n_steps, const std::string& variant, std::uint64_t seed);

}  // namespace spectre::data
