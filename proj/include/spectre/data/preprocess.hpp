#pragma once

#include "spectre/data/dataset.hpp"

namespace spectre::data {

inline constexpr double kStdFloor = 1e-8;

/// Per-column affine standardization fitted on training rows.
struct Standardizer {
  Vector means;
  Vector stds;  // population std, floored at kStdFloor

  static Standardizer fit(const Matrix& rows);
  /// Fits on the rows of `data` tagged train.
  static Standardizer fit(const LabeledDataset& data);

  Matrix apply(const Matrix& x) const;
  LabeledDataset apply(LabeledDataset data) const;
};

/// Tags rows train/val with a seeded permutation. The train count is
/// round(train_frac * n). Retries up to 10 reshuffles while either partition
/// misses a class present in the data, then refuses.
LabeledDataset split(LabeledDataset data, double train_frac, std::uint64_t seed);

}  // namespace spectre::data
