#pragma once

#include "spectre/data/dataset.hpp"
#include "spectre/harness/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace spectre::harness {

/// Everything one (dataset, seed) cell needs, in raw feature units.
struct ExperimentData {
  data::Family family = data::Family::kSynthetic;
  std::uint64_t seed = 0;
  /// Train and val rows only; detectors fit on this.
  data::LabeledDataset fit;
  /// "regular" plus the configured anomaly variants, all rows tagged test.
  std::map<std::string, data::LabeledDataset> tests;
  /// Files read while building `fit` and each test set.
  std::vector<std::string> fit_sources;
  std::map<std::string, std::string> test_sources;

  std::string name() const { return data::to_string(family); }
};

ExperimentData build_data(const ExperimentConfig& config, data::Family family, std::uint64_t seed);

}  // namespace spectre::harness
