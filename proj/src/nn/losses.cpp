#include "spectre/nn/losses.hpp"

#include <cmath>

namespace spectre::nn {

Matrix softmax(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double top = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - top).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Vector log_sum_exp(const Matrix& logits) {
  Vector out(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    out(r) = top + std::log((logits.row(r).array() - top).exp().sum());
  }
  return out;
}

double cross_entropy(const Matrix& logits, const Vector& targets, Matrix* d_logits) {
  const Eigen::Index n = logits.rows();
  if (targets.size() != n) throw InvalidInput("cross_entropy: target count does not match rows");
  const Vector lse = log_sum_exp(logits);
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto label = static_cast<Eigen::Index>(targets(r));
    if (label < 0 || label >= logits.cols()) throw InvalidInput("cross_entropy: label out of range");
    total += lse(r) - logits(r, label);
  }
  if (d_logits != nullptr) {
    *d_logits = softmax(logits);
    for (Eigen::Index r = 0; r < n; ++r) (*d_logits)(r, static_cast<Eigen::Index>(targets(r))) -= 1.0;
    *d_logits /= static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

double gauss_reg_loss(const Matrix& features, Matrix* d_features) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw InvalidInput("gauss_reg_loss: needs at least 2 rows, got " + std::to_string(n));
  const RowVector mean = features.colwise().mean();
  Matrix centered = features.rowwise() - mean;
  const RowVector var = centered.array().square().colwise().mean();
  const RowVector excess = var.array() - 1.0;
  const double loss = mean.squaredNorm() + excess.squaredNorm();
  if (d_features != nullptr) {
    const double inv_n = 1.0 / static_cast<double>(n);
    // d/dh_ij = 2 mu_j / n + 4 (var_j - 1)(h_ij - mu_j) / n
    *d_features = centered * (4.0 * inv_n * excess).asDiagonal();
    d_features->rowwise() += 2.0 * inv_n * mean;
  }
  return loss;
}

double mean_squared_error(const Matrix& outputs, const Vector& targets, Matrix* d_outputs) {
  if (outputs.cols() != 1 || outputs.rows() != targets.size()) {
    throw InvalidInput("mean_squared_error: expected a single output column matching the targets");
  }
  const Vector diff = outputs.col(0) - targets;
  const double n = static_cast<double>(targets.size());
  if (d_outputs != nullptr) *d_outputs = 2.0 * diff / n;
  return diff.squaredNorm() / n;
}

double CrossEntropyObjective::evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) {
  double loss = cross_entropy(outputs, targets, grad);
  if (entropy_bonus_ == 0.0) return loss;
  const Matrix probs = softmax(outputs);
  const Matrix log_probs = probs.array().max(1e-300).log().matrix();
  const Vector entropy = -(probs.cwiseProduct(log_probs)).rowwise().sum();
  const double n = static_cast<double>(outputs.rows());
  loss -= entropy_bonus_ * entropy.mean();
  if (grad != nullptr) {
    // dH/dz_j = -p_j (log p_j + H)
    Matrix shifted = log_probs;
    shifted.colwise() += entropy;
    *grad += (entropy_bonus_ / n) * probs.cwiseProduct(shifted);
  }
  return loss;
}

double CrossEntropyObjective::validation_loss(const Matrix& outputs, const Vector& targets) {
  return cross_entropy(outputs, targets);
}

}  // namespace spectre::nn
