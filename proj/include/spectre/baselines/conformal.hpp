#pragma once

#include "spectre/common/types.hpp"

namespace spectre::baselines {

/// Split-conformal threshold: the ceil((n + 1)(1 - alpha))-th smallest score,
/// or +infinity when that rank exceeds n.
double conformal_quantile(std::vector<double> scores, double alpha);

/// 1 - p_y per calibration row.
Vector lac_scores(const Matrix& probs, const LabelList& labels);
/// Classes with p_k >= 1 - q.
Vector lac_set_sizes(const Matrix& probs, double q);

/// Predictive entropy per row.
Vector entropy_scores(const Matrix& probs);
/// {argmax} when the entropy is within q, otherwise every class.
Vector entropy_set_sizes(const Matrix& probs, double q);

/// Cumulative probability (classes sorted by descending probability, ties by
/// index) up to and including the true class.
Vector aps_scores(const Matrix& probs, const LabelList& labels);
/// Classes whose cumulative probability is at most q.
Vector aps_set_sizes(const Matrix& probs, double q);

}  // namespace spectre::baselines
