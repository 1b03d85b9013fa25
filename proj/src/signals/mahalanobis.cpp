#include "spectre/signals/mahalanobis.hpp"

#include <Eigen/Eigenvalues>

#include <limits>

namespace spectre::signals {

Vector MahalanobisModel::min_distances(const Matrix& x) const {
  if (class_means.empty()) throw InvalidInput("mahalanobis: model is not fitted");
  if (x.cols() != precision.cols()) {
    throw InvalidInput("mahalanobis: expected width " + std::to_string(precision.cols()) + ", got " +
                       std::to_string(x.cols()));
  }
  Vector best = Vector::Constant(x.rows(), std::numeric_limits<double>::infinity());
  for (const Vector& mean : class_means) {
    const Matrix diff = x.rowwise() - mean.transpose();
    const Vector q = (diff * precision).cwiseProduct(diff).rowwise().sum();
    best = best.cwiseMin(q);
  }
  return best.cwiseMax(0.0);
}

Vector MahalanobisModel::scores(const Matrix& x) const { return -min_distances(x); }

MahalanobisModel fit_mahalanobis(const Matrix& features, const LabelList& labels, FeatureSpace space) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidInput("fit_mahalanobis: feature rows and labels differ in length");
  }
  int classes = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidInput("fit_mahalanobis: negative label");
    classes = std::max(classes, l + 1);
  }
  const Eigen::Index d = features.cols();
  std::vector<Vector> sums(static_cast<std::size_t>(classes), Vector::Zero(d));
  std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums[static_cast<std::size_t>(labels[i])] += features.row(static_cast<Eigen::Index>(i)).transpose();
    counts[static_cast<std::size_t>(labels[i])]++;
  }
  MahalanobisModel model;
  model.space = space;
  std::vector<int> present;
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) continue;
    if (counts[static_cast<std::size_t>(c)] < 2) {
      throw InvalidInput("fit_mahalanobis: class " + std::to_string(c) + " has fewer than 2 rows");
    }
    present.push_back(c);
  }
  if (present.empty()) throw InvalidInput("fit_mahalanobis: no rows");
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(classes), -1);
  for (int c : present) {
    slot[static_cast<std::size_t>(c)] = static_cast<Eigen::Index>(model.class_means.size());
    model.class_means.push_back(sums[static_cast<std::size_t>(c)] / static_cast<double>(counts[static_cast<std::size_t>(c)]));
  }

  Matrix residuals(features.rows(), d);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& mean = model.class_means[static_cast<std::size_t>(slot[static_cast<std::size_t>(labels[i])])];
    residuals.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(i)) - mean.transpose();
  }
  const double dof = static_cast<double>(features.rows()) - static_cast<double>(present.size());
  if (dof <= 0.0) throw InvalidInput("fit_mahalanobis: N - C must be positive");
  Matrix cov = residuals.transpose() * residuals / dof;
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  const double smallest = values.minCoeff();
  model.condition_number =
      smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  Vector adjusted = values;
  if (!(model.condition_number <= kMaxCondition)) {
    model.ridge = 1e-6 * cov.trace() / static_cast<double>(d);
    if (!(model.ridge > 0.0)) model.ridge = 1e-12;
    adjusted = (values.array() + model.ridge).max(model.ridge * 1e-3);
  }
  model.precision = eig.eigenvectors() * adjusted.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  model.precision = 0.5 * (model.precision + model.precision.transpose());
  return model;
}

}  // namespace spectre::signals
