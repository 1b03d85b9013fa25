#pragma once

#include "spectre/common/types.hpp"

namespace spectre::nn {

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Row-wise log-sum-exp.
Vector log_sum_exp(const Matrix& logits);

/// Mean softmax cross-entropy over rows. `targets` hold class indices.
double cross_entropy(const Matrix& logits, const Vector& targets, Matrix* d_logits = nullptr);

/// Gaussianization penalty |mean|^2 + |var - 1|^2 over a batch of features,
/// with population (divide-by-n) variance. Requires at least two rows.
double gauss_reg_loss(const Matrix& features, Matrix* d_features = nullptr);

/// Mean squared error between a single-column output and `targets`.
double mean_squared_error(const Matrix& outputs, const Vector& targets, Matrix* d_outputs = nullptr);

/// Loss attached to a network's outputs during training. Implementations may
/// keep state that evolves with training (annealing, running centroids).
class Objective {
 public:
  virtual ~Objective() = default;

  /// Mean loss over rows; fills d(loss)/d(outputs) when `grad` is non-null.
  virtual double evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) = 0;

  /// Criterion used for early stopping. Defaults to `evaluate`.
  virtual double validation_loss(const Matrix& outputs, const Vector& targets) {
    return evaluate(outputs, targets, nullptr);
  }

  virtual void begin_epoch(std::size_t /*epoch*/) {}
  virtual void after_batch(const Matrix& /*outputs*/, const Vector& /*targets*/) {}
  virtual void on_new_best() {}
  virtual void restore_best() {}
};

/// Softmax cross-entropy, optionally minus `entropy_bonus` times the mean
/// predictive entropy (maximum-entropy regularization). Validation loss is
/// always plain cross-entropy.
class CrossEntropyObjective : public Objective {
 public:
  explicit CrossEntropyObjective(double entropy_bonus = 0.0) : entropy_bonus_(entropy_bonus) {}
  double evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) override;
  double validation_loss(const Matrix& outputs, const Vector& targets) override;

 private:
  double entropy_bonus_;
};

class MeanSquaredErrorObjective : public Objective {
 public:
  double evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) override {
    return mean_squared_error(outputs, targets, grad);
  }
};

}  // namespace spectre::nn
