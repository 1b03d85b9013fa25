#pragma once

#include "spectre/common/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spectre::data {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& text);

/// Provenance carried along with every dataset.
struct DatasetMeta {
  std::string name;
  std::string variant = "regular";
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
};

/// Feature matrix plus class labels and per-row split tags.
struct LabeledDataset {
  Matrix features;
  LabelList labels;
  std::vector<Split> split;
  DatasetMeta meta;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// One past the largest label (0 when unlabeled).
  int num_classes() const;

  IndexList rows_in(Split which) const;
  Matrix features_in(Split which) const;
  LabelList labels_in(Split which) const;

  /// Copy restricted to `rows`, preserving meta.
  LabeledDataset subset(const IndexList& rows) const;

  /// Index of the named column, if present.
  std::optional<std::size_t> column_index(const std::string& name) const;

  /// Throws InvalidInput unless shapes agree, labels are non-negative and
  /// every feature is finite.
  void validate() const;
};

/// Convenience: all rows of `data` tagged `which`.
LabeledDataset with_split(LabeledDataset data, Split which);

}  // namespace spectre::data
