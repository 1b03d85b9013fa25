#pragma once

#include "spectre/baselines/baselines.hpp"
#include "spectre/data/generators.hpp"
#include "spectre/detector/detector.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace spectre::harness {

inline constexpr const char* kSpectreName = "SPECTRE-G2";

/// SPECTRE-G2 followed by the twelve baselines.
const std::vector<std::string>& all_detectors();
void validate_detector(const std::string& name);

enum class AblationVariant {
  kFull,
  kMinusGauss,
  kMinusFtMahaP,
  kMinusInMaha,
  kMinusODIN,
  kMinusUSD,
  kMinusMI,
  kMinusEnergy,
  kMinusEntropy,
  kNoGaussLoss,
  kSingleModelK1,
  kGaussOnly,
  kInMahaOnly,
  kOdinOnly,
};

const std::vector<AblationVariant>& all_ablation_variants();
std::string to_string(AblationVariant v);
AblationVariant parse_ablation_variant(const std::string& name);

struct DatasetSizes {
  std::size_t synthetic_train = 10000;
  std::size_t synthetic_test = 2000;
  std::size_t gridworld_train = 5000;
  std::size_t gridworld_test = 1000;
  std::size_t adult_test = 2000;
};

struct ExperimentConfig {
  std::vector<data::Family> datasets{data::Family::kSynthetic};
  /// Anomaly variants per family; a family absent here uses all of its variants.
  std::map<data::Family, std::vector<std::string>> variants;
  std::vector<std::string> detectors = all_detectors();
  std::vector<std::uint64_t> seeds{42, 43, 44, 45, 46};
  std::filesystem::path out = "results";
  std::size_t jobs = 1;
  data::NoiseConvention noise = data::NoiseConvention::kStdDev;
  DatasetSizes sizes;

  std::filesystem::path adult_csv;
  std::filesystem::path features_train;
  std::map<std::string, std::filesystem::path> features_tests;  // must contain "regular"

  std::vector<AblationVariant> ablation_variants = all_ablation_variants();

  detector::SpectreOptions spectre;
  baselines::BaselineOptions baseline;

  /// Anomaly variants evaluated for `family` (never "regular").
  std::vector<std::string> anomaly_variants(data::Family family) const;

  /// Throws InvalidInput naming the offending field.
  void validate() const;
};

/// Parses the flat `key = value[, value...]` format. Blank lines and lines
/// starting with '#' are ignored. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// "42,43" or "42-46" (inclusive), or a mix.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Seed for a detector on a dataset: mix of config seed, detector and dataset names.
std::uint64_t detector_seed(std::uint64_t seed, const std::string& detector, const std::string& dataset);

}  // namespace spectre::harness
