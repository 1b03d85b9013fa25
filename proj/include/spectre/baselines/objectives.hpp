#pragma once

#include "spectre/nn/losses.hpp"

#include <vector>

namespace spectre::baselines {

/// Softplus evidence; alpha = evidence + 1.
Matrix dirichlet_alpha(const Matrix& logits);

/// K / sum(alpha) per row.
Vector vacuity(const Matrix& alpha);

/// Expected squared error under Dir(alpha) plus `kl_weight` times
/// KL(Dir(alpha_tilde) || Dir(1)), where alpha_tilde removes the true
/// class's evidence. Mean over rows; `d_logits` is the gradient w.r.t. the
/// pre-softplus outputs.
double evidential_loss(const Matrix& logits, const Vector& targets, double kl_weight, Matrix* d_logits = nullptr);

/// KL weight min(1, epoch / anneal_epochs) per epoch. Validation loss is the
/// cross-entropy of the expected probabilities alpha / S.
class EvidentialObjective : public nn::Objective {
 public:
  explicit EvidentialObjective(double anneal_epochs = 10.0) : anneal_epochs_(anneal_epochs) {}
  double evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) override;
  double validation_loss(const Matrix& outputs, const Vector& targets) override;
  void begin_epoch(std::size_t epoch) override;
  double kl_weight() const { return kl_weight_; }

 private:
  double anneal_epochs_;
  double kl_weight_ = 0.0;
};

/// exp(-|phi - c|^2 / (2 l^2)) for every row and centroid.
Matrix rbf_activations(const Matrix& features, const std::vector<Vector>& centroids, double length_scale);

/// Class centroids kept as count-normalized exponential moving averages:
/// N_c <- g N_c + (1 - g) n_c, M_c <- g M_c + (1 - g) sum_c phi, c_c = M_c / N_c.
class CentroidTracker {
 public:
  CentroidTracker(std::size_t classes, std::size_t dims, double decay);
  void update(const Matrix& features, const Vector& targets);
  bool initialized(std::size_t c) const { return counts_(static_cast<Eigen::Index>(c)) > 0.0; }
  std::vector<Vector> centroids() const;
  std::size_t classes() const { return static_cast<std::size_t>(counts_.size()); }

 private:
  double decay_;
  Vector counts_;
  Matrix sums_;  // classes x dims
};

/// Binary cross-entropy between RBF activations and one-hot targets, with
/// centroids updated after each batch. The network's outputs are the
/// feature vectors phi(x).
class DuqObjective : public nn::Objective {
 public:
  DuqObjective(std::size_t classes, std::size_t dims, double length_scale, double decay);
  double evaluate(const Matrix& outputs, const Vector& targets, Matrix* grad) override;
  void after_batch(const Matrix& outputs, const Vector& targets) override;
  void on_new_best() override { best_ = tracker_; }
  void restore_best() override { tracker_ = best_; }

  std::vector<Vector> centroids() const { return tracker_.centroids(); }

 private:
  double length_scale_;
  CentroidTracker tracker_;
  CentroidTracker best_;
};

}  // namespace spectre::baselines
