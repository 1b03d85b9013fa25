#pragma once

#include "spectre/common/rng.hpp"
#include "spectre/common/types.hpp"
#include "spectre/data/dataset.hpp"
#include "spectre/nn/losses.hpp"
#include "spectre/nn/network.hpp"

#include <cstdint>
#include <vector>

namespace spectre::nn {

/// AdamW with a cosine-annealed learning rate and early stopping on the
/// validation criterion. `weight_decay = 0` gives plain Adam.
struct OptimizerConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double min_learning_rate = 1e-6;
  std::size_t max_epochs = 50;
  std::size_t patience = 8;
  std::size_t batch_size = 128;
  bool cosine_schedule = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Learning rate for a zero-based epoch index.
double cosine_learning_rate(const OptimizerConfig& config, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  Network network;  // weights from the best validation epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Train/validation arrays for the generic loop.
struct TrainingArrays {
  Matrix train_x;
  Vector train_y;
  Matrix val_x;
  Vector val_y;
};

/// Minibatch training of `initial` against `objective`, adding
/// `gauss_lambda * gauss_reg_loss(features)` on every training batch.
/// Aborts with TrainingFailure naming epoch and batch on a non-finite loss.
TrainResult train_network(Network initial, Objective& objective, const TrainingArrays& data,
                          const OptimizerConfig& config, double gauss_lambda = 0.0);

/// Classifier training on the train/val splits of `data`. `gauss_lambda = 0`
/// reduces the loss to plain cross-entropy.
TrainResult train_classifier(const data::LabeledDataset& data, const Architecture& arch, double gauss_lambda,
                             const OptimizerConfig& config);

/// Builds the arrays for classification from the train/val splits; refuses
/// single-class data or a missing validation split.
TrainingArrays classification_arrays(const data::LabeledDataset& data);

/// Random hold-out of `val_fraction` of the rows for early stopping.
TrainingArrays holdout_arrays(const Matrix& x, const Vector& y, double val_fraction, std::uint64_t seed);

/// Labels as a double vector, the representation objectives consume.
Vector to_targets(const LabelList& labels);

}  // namespace spectre::nn
