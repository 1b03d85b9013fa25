#pragma once

#include "spectre/common/types.hpp"
#include "spectre/nn/serialize.hpp"

namespace spectre::baselines {

/// Multinomial logistic regression with an L2 penalty on the weights,
/// minimizing sum_i CE_i + (l2 / 2) |W|^2 by damped Newton iterations.
struct LogisticRegression {
  Matrix weights;  // (d + 1) x C, last row is the intercept
  std::size_t iterations = 0;
  double gradient_norm = 0.0;

  Matrix predict_proba(const Matrix& x) const;
};

struct LogisticOptions {
  double l2 = 1.0;
  double tolerance = 1e-6;  // on the gradient norm
  std::size_t max_iterations = 100;
};

/// Objective value and its gradient for `w` (same layout as weights).
double logistic_objective(const Matrix& x, const LabelList& labels, const Matrix& w, double l2, Matrix* grad);

LogisticRegression fit_logistic(const Matrix& x, const LabelList& labels, std::size_t classes,
                                const LogisticOptions& options = {});

}  // namespace spectre::baselines
