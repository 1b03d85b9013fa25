#pragma once

#include "spectre/common/rng.hpp"
#include "spectre/common/types.hpp"

namespace spectre {

/// Population covariance of the rows of `x` (divisor n).
Matrix empirical_covariance(const Matrix& x);

/// `n` draws from N(mean, cov). Uses a Cholesky factor, falling back to a
/// clipped eigen square root when `cov` is not numerically positive definite.
Matrix sample_gaussian(const Vector& mean, const Matrix& cov, std::size_t n, Rng& rng);

/// Linear-interpolated quantile (q in [0, 1]) of `values`.
double quantile(std::vector<double> values, double q);

}  // namespace spectre
