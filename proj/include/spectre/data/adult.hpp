#pragma once

#include "spectre/data/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spectre::data {

/// Continuous columns retained from the census file, in feature order.
const std::vector<std::string>& adult_continuous_columns();
const std::vector<std::string>& adult_occupations();
const std::vector<std::string>& adult_marital_statuses();

/// Parses the standard comma-separated census file (15 fields per row,
/// optional header). Rows containing a "?" marker are dropped. Features are
/// in raw units: the five continuous columns followed by one-hot occupation
/// and marital-status columns. Label: 1 for income ">50K".
LabeledDataset load_adult_csv(const std::filesystem::path& path);

/// Injects one of the label/covariate anomalies into raw-unit Adult rows.
/// "regular" returns the input unchanged.
LabeledDataset inject_adult_anomaly(const LabeledDataset& base, const std::string& variant, std::uint64_t seed);

/// Writes `n` synthetic rows in census format (a few carry "?" markers) for
/// tests and desk runs without the real file.
void write_adult_fixture(const std::filesystem::path& path, std::size_t n, std::uint64_t seed);

}  // namespace spectre::data
