#include "spectre/baselines/logistic.hpp"

#include "spectre/nn/losses.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace spectre::baselines {

namespace {

// Tiny intercept penalty so the over-parameterized softmax has a unique optimum.
constexpr double kInterceptPenalty = 1e-8;

Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

Vector penalty_diagonal(Eigen::Index rows, double l2) {
  Vector pen = Vector::Constant(rows, l2);
  pen(rows - 1) = kInterceptPenalty;
  return pen;
}

double objective_xb(const Matrix& xb, const LabelList& labels, const Matrix& w, double l2, Matrix* grad,
                    Matrix* probs_out) {
  const Matrix logits = xb * w;
  const Vector lse = nn::log_sum_exp(logits);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < xb.rows(); ++r) loss += lse(r) - logits(r, labels[static_cast<std::size_t>(r)]);
  const Vector pen = penalty_diagonal(w.rows(), l2);
  loss += 0.5 * (pen.asDiagonal() * w.cwiseProduct(w)).sum();
  if (grad || probs_out) {
    Matrix p = nn::softmax(logits);
    if (grad) {
      Matrix resid = p;
      for (Eigen::Index r = 0; r < xb.rows(); ++r) resid(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
      *grad = xb.transpose() * resid + pen.asDiagonal() * w;
    }
    if (probs_out) *probs_out = std::move(p);
  }
  return loss;
}

}  // namespace

Matrix LogisticRegression::predict_proba(const Matrix& x) const {
  if (x.cols() + 1 != weights.rows()) throw InvalidInput("logistic: feature width mismatch");
  return nn::softmax(with_intercept(x) * weights);
}

double logistic_objective(const Matrix& x, const LabelList& labels, const Matrix& w, double l2, Matrix* grad) {
  return objective_xb(with_intercept(x), labels, w, l2, grad, nullptr);
}

LogisticRegression fit_logistic(const Matrix& x, const LabelList& labels, std::size_t classes,
                                const LogisticOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty()) {
    throw InvalidInput("fit_logistic: rows and labels differ or are empty");
  }
  const auto k = static_cast<Eigen::Index>(classes);
  for (int l : labels) {
    if (l < 0 || l >= k) throw InvalidInput("fit_logistic: label out of range");
  }
  const Matrix xb = with_intercept(x);
  const Eigen::Index p = xb.cols();
  LogisticRegression model;
  model.weights = Matrix::Zero(p, k);
  const Vector pen = penalty_diagonal(p, options.l2);

  Matrix grad;
  Matrix probs;
  double loss = objective_xb(xb, labels, model.weights, options.l2, &grad, &probs);
  for (model.iterations = 0; model.iterations < options.max_iterations; ++model.iterations) {
    model.gradient_norm = grad.norm();
    if (model.gradient_norm < options.tolerance) break;

    // Hessian blocks H_ab = X^T diag(p_a (delta_ab - p_b)) X + delta_ab * penalty.
    Matrix h = Matrix::Zero(p * k, p * k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = a; b < k; ++b) {
        Vector wts = -probs.col(a).cwiseProduct(probs.col(b));
        if (a == b) wts += probs.col(a);
        Matrix block = xb.transpose() * wts.asDiagonal() * xb;
        if (a == b) block.diagonal() += pen;
        h.block(a * p, b * p, p, p) = block;
        if (a != b) h.block(b * p, a * p, p, p) = block.transpose();
      }
    }
    const Vector g = Eigen::Map<const Vector>(grad.data(), grad.size());
    Vector step = h.ldlt().solve(g);
    if (!step.allFinite()) step = g;

    double t = 1.0;
    Matrix next;
    double next_loss = 0.0;
    for (int tries = 0; tries < 40; ++tries, t *= 0.5) {
      next = model.weights - t * Eigen::Map<const Matrix>(step.data(), p, k);
      next_loss = objective_xb(xb, labels, next, options.l2, nullptr, nullptr);
      if (next_loss <= loss - 1e-4 * t * g.dot(step)) break;
    }
    if (!(next_loss <= loss)) break;  // no further progress possible
    model.weights = next;
    loss = objective_xb(xb, labels, model.weights, options.l2, &grad, &probs);
  }
  model.gradient_norm = grad.norm();
  return model;
}

}  // namespace spectre::baselines
