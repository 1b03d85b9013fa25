#include "spectre/baselines/objectives.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>

namespace spectre::baselines {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int target_class(const Vector& targets, Eigen::Index r, Eigen::Index classes) {
  const auto y = static_cast<Eigen::Index>(targets(r));
  if (y < 0 || y >= classes) throw InvalidInput("target class out of range");
  return static_cast<int>(y);
}

}  // namespace

Matrix dirichlet_alpha(const Matrix& logits) {
  return logits.unaryExpr([](double x) { return softplus(x) + 1.0; });
}

Vector vacuity(const Matrix& alpha) {
  return (static_cast<double>(alpha.cols()) / alpha.rowwise().sum().array()).matrix();
}

double evidential_loss(const Matrix& logits, const Vector& targets, double kl_weight, Matrix* d_logits) {
  using boost::math::digamma;
  using boost::math::trigamma;
  const Eigen::Index n = logits.rows();
  const Eigen::Index k = logits.cols();
  if (n == 0 || targets.size() != n) throw InvalidInput("evidential_loss: shape mismatch");
  const Matrix alpha = dirichlet_alpha(logits);
  const double lgamma_k = std::lgamma(static_cast<double>(k));
  if (d_logits) d_logits->resize(n, k);
  double total = 0.0;
  Vector d_alpha(k);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = target_class(targets, r, k);
    const Vector a = alpha.row(r).transpose();
    const double s = a.sum();
    const Vector p = a / s;
    Vector onehot = Vector::Zero(k);
    onehot(y) = 1.0;

    const double sum_p2 = p.squaredNorm();
    const Vector err = onehot - p;
    const double mse = err.squaredNorm() + (1.0 - sum_p2) / (s + 1.0);

    Vector at = a;
    at(y) = 1.0;
    const double st = at.sum();
    double kl = std::lgamma(st) - lgamma_k;
    double excess = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      kl += -std::lgamma(at(c)) + (at(c) - 1.0) * (digamma(at(c)) - digamma(st));
      excess += at(c) - 1.0;
    }
    total += mse + kl_weight * kl;

    if (d_logits) {
      const double err_dot_p = err.dot(p);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double d_sq = (-2.0 / s) * (err(j) - err_dot_p);
        const double d_var = (-2.0 / s) * (p(j) - sum_p2) / (s + 1.0) - (1.0 - sum_p2) / ((s + 1.0) * (s + 1.0));
        double d_kl = 0.0;
        if (j != y) d_kl = (at(j) - 1.0) * trigamma(at(j)) - trigamma(st) * excess;
        d_alpha(j) = d_sq + d_var + kl_weight * d_kl;
      }
      for (Eigen::Index j = 0; j < k; ++j) (*d_logits)(r, j) = d_alpha(j) * sigmoid(logits(r, j)) / static_cast<double>(n);
    }
  }
  return total / static_cast<double>(n);
}

double EvidentialObjective::evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) {
  return evidential_loss(outputs, targets, kl_weight_, grad);
}

double EvidentialObjective::validation_loss(const Matrix& outputs, const Vector& targets) {
  const Matrix alpha = dirichlet_alpha(outputs);
  double total = 0.0;
  for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
    const int y = target_class(targets, r, alpha.cols());
    total -= std::log(alpha(r, y) / alpha.row(r).sum());
  }
  return total / static_cast<double>(alpha.rows());
}

void EvidentialObjective::begin_epoch(std::size_t epoch) {
  kl_weight_ = std::min(1.0, static_cast<double>(epoch) / anneal_epochs_);
}

Matrix rbf_activations(const Matrix& features, const std::vector<Vector>& centroids, double length_scale) {
  Matrix out(features.rows(), static_cast<Eigen::Index>(centroids.size()));
  const double denom = 2.0 * length_scale * length_scale;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const Vector d2 = (features.rowwise() - centroids[c].transpose()).rowwise().squaredNorm();
    out.col(static_cast<Eigen::Index>(c)) = (-d2.array() / denom).exp().matrix();
  }
  return out;
}

CentroidTracker::CentroidTracker(std::size_t classes, std::size_t dims, double decay)
    : decay_(decay),
      counts_(Vector::Zero(static_cast<Eigen::Index>(classes))),
      sums_(Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dims))) {
  if (!(decay >= 0.0 && decay < 1.0)) throw InvalidInput("centroid decay must be in [0, 1)");
}

void CentroidTracker::update(const Matrix& features, const Vector& targets) {
  const auto k = counts_.size();
  Vector n = Vector::Zero(k);
  Matrix sums = Matrix::Zero(k, sums_.cols());
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const int y = target_class(targets, r, k);
    n(y) += 1.0;
    sums.row(y) += features.row(r);
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (n(c) == 0.0) continue;
    if (counts_(c) == 0.0) {
      // First sighting: start from the batch mean instead of decaying from zero.
      counts_(c) = n(c);
      sums_.row(c) = sums.row(c);
      continue;
    }
    counts_(c) = decay_ * counts_(c) + (1.0 - decay_) * n(c);
    sums_.row(c) = decay_ * sums_.row(c) + (1.0 - decay_) * sums.row(c);
  }
}

std::vector<Vector> CentroidTracker::centroids() const {
  std::vector<Vector> out;
  for (Eigen::Index c = 0; c < counts_.size(); ++c) {
    out.push_back(counts_(c) > 0.0 ? Vector(sums_.row(c).transpose() / counts_(c)) : Vector::Zero(sums_.cols()));
  }
  return out;
}

DuqObjective::DuqObjective(std::size_t classes, std::size_t dims, double length_scale, double decay)
    : length_scale_(length_scale), tracker_(classes, dims, decay), best_(tracker_) {}

double DuqObjective::evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) {
  // Classes without a centroid yet take this batch's class means.
  for (std::size_t c = 0; c < tracker_.classes(); ++c) {
    if (!tracker_.initialized(c)) {
      tracker_.update(outputs, targets);
      break;
    }
  }
  const std::vector<Vector> centroids = tracker_.centroids();
  const Matrix k = rbf_activations(outputs, centroids, length_scale_);
  const Eigen::Index n = outputs.rows();
  const Eigen::Index classes = k.cols();
  constexpr double kClip = 1e-12;
  double total = 0.0;
  if (grad) *grad = Matrix::Zero(n, outputs.cols());
  const double l2 = length_scale_ * length_scale_;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = target_class(targets, r, classes);
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double kv = std::clamp(k(r, c), kClip, 1.0 - kClip);
      const double t = c == y ? 1.0 : 0.0;
      total -= t * std::log(kv) + (1.0 - t) * std::log(1.0 - kv);
      if (grad) {
        // dBCE/dk * dk/dphi, with dk/dphi = -k (phi - c) / l^2.
        const double d_k = (k(r, c) <= kClip || k(r, c) >= 1.0 - kClip) ? 0.0 : -t / kv + (1.0 - t) / (1.0 - kv);
        grad->row(r) += d_k * (-k(r, c) / l2) * (outputs.row(r) - centroids[static_cast<std::size_t>(c)].transpose());
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(n * classes);
  if (grad) *grad *= scale;
  return total * scale;
}

void DuqObjective::after_batch(const Matrix& outputs, const Vector& targets) { tracker_.update(outputs, targets); }

}  // namespace spectre::baselines
