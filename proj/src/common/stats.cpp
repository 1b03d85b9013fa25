#include "spectre/common/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace spectre {

Matrix empirical_covariance(const Matrix& x) {
  if (x.rows() < 1) throw InvalidInput("empirical_covariance: no rows");
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows());
}

Matrix sample_gaussian(const Vector& mean, const Matrix& cov, std::size_t n, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d) throw InvalidInput("sample_gaussian: covariance shape mismatch");
  Matrix factor;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    factor = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  Matrix z(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) z(r, c) = rng.normal();
  }
  Matrix out = z * factor.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace spectre
