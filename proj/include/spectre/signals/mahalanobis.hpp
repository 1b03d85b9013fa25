#pragma once

#include "spectre/common/types.hpp"

#include <string>
#include <vector>

namespace spectre::signals {

enum class FeatureSpace { kPlainFeatures, kInput };

/// Class means plus the inverse of the pooled (tied) covariance, estimated
/// from class-centred residuals with divisor N - C.
struct MahalanobisModel {
  std::vector<Vector> class_means;
  Matrix precision;
  FeatureSpace space = FeatureSpace::kInput;
  double ridge = 0.0;            // added to the diagonal before inversion (0 if none)
  double condition_number = 0.0;  // of the unregularized covariance

  /// Squared distance to the nearest class mean, per row.
  Vector min_distances(const Matrix& x) const;
  /// -min_distances: 0 at a class mean, negative elsewhere.
  Vector scores(const Matrix& x) const;
};

/// Condition number above which a ridge of 1e-6 * trace(S) / d is added.
inline constexpr double kMaxCondition = 1e10;

/// Requires every class to have at least 2 rows.
MahalanobisModel fit_mahalanobis(const Matrix& features, const LabelList& labels, FeatureSpace space);

}  // namespace spectre::signals
