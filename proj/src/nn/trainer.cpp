#include "spectre/nn/trainer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

namespace spectre::nn {

void OptimizerConfig::validate() const {
  if (max_epochs == 0) throw InvalidInput("optimizer: max_epochs must be positive");
  if (patience >= max_epochs) throw InvalidInput("optimizer: patience must be smaller than max_epochs");
  if (batch_size < 2) throw InvalidInput("optimizer: batch_size must be at least 2");
  if (!(learning_rate > 0.0)) throw InvalidInput("optimizer: learning_rate must be positive");
}

double cosine_learning_rate(const OptimizerConfig& config, std::size_t epoch) {
  if (!config.cosine_schedule) return config.learning_rate;
  const double progress = static_cast<double>(epoch) / static_cast<double>(config.max_epochs);
  return config.min_learning_rate +
         0.5 * (config.learning_rate - config.min_learning_rate) * (1.0 + std::cos(std::numbers::pi * progress));
}

Vector to_targets(const LabelList& labels) {
  Vector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) out(static_cast<Eigen::Index>(i)) = labels[i];
  return out;
}

namespace {

class AdamW {
 public:
  AdamW(const OptimizerConfig& config, std::size_t size)
      : config_(config), m_(Vector::Zero(static_cast<Eigen::Index>(size))), v_(m_) {}

  void step(std::vector<std::span<double>>& params, const Vector& grad, double lr) {
    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    m_ = b1 * m_ + (1.0 - b1) * grad;
    v_ = b2 * v_ + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    Eigen::Index offset = 0;
    for (auto& p : params) {
      for (std::size_t i = 0; i < p.size(); ++i, ++offset) {
        const double m_hat = m_(offset) / c1;
        const double v_hat = v_(offset) / c2;
        p[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.adam_epsilon) + config_.weight_decay * p[i]);
      }
    }
  }

 private:
  OptimizerConfig config_;
  Vector m_;
  Vector v_;
  std::uint64_t t_ = 0;
};

Matrix gather(const Matrix& x, const IndexList& order, std::size_t begin, std::size_t end) {
  Matrix out(static_cast<Eigen::Index>(end - begin), x.cols());
  for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Eigen::Index>(i - begin)) = x.row(static_cast<Eigen::Index>(order[i]));
  return out;
}

Vector gather(const Vector& y, const IndexList& order, std::size_t begin, std::size_t end) {
  Vector out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) out(static_cast<Eigen::Index>(i - begin)) = y(static_cast<Eigen::Index>(order[i]));
  return out;
}

}  // namespace

TrainResult train_network(Network initial, Objective& objective, const TrainingArrays& data,
                          const OptimizerConfig& config, double gauss_lambda) {
  config.validate();
  if (gauss_lambda < 0.0) throw InvalidInput("train_network: gauss_lambda must be non-negative");
  const auto n_train = static_cast<std::size_t>(data.train_x.rows());
  if (n_train < 2) throw InvalidInput("train_network: too few training rows");
  if (data.val_x.rows() == 0) throw InvalidInput("train_network: a validation split is required for early stopping");

  Rng rng(config.seed);
  Network net = std::move(initial);
  auto params = net.parameters();
  AdamW optimizer(config, net.parameter_count());

  TrainResult result;
  result.network = net;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  IndexList order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = cosine_learning_rate(config, epoch);
    objective.begin_epoch(epoch);
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0, batch = 0; begin < n_train; begin += config.batch_size, ++batch) {
      const std::size_t end = std::min(begin + config.batch_size, n_train);
      if (end - begin < 2) continue;
      const Matrix x = gather(data.train_x, order, begin, end);
      const Vector y = gather(data.train_y, order, begin, end);

      net.power_iteration();
      ForwardCache cache;
      const ForwardOutput out = net.forward(x, Mode::kTraining, &rng, &cache);
      Matrix d_out;
      double loss = objective.evaluate(out.logits, y, &d_out);
      Matrix d_features;
      if (gauss_lambda > 0.0) {
        loss += gauss_lambda * gauss_reg_loss(out.features, &d_features);
        d_features *= gauss_lambda;
      }
      if (!std::isfinite(loss)) {
        throw TrainingFailure("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch));
      }
      const Gradients grads = net.backward(cache, d_out, gauss_lambda > 0.0 ? &d_features : nullptr, nullptr);
      optimizer.step(params, grads.flatten(), lr);
      net.update_running_stats(cache);
      objective.after_batch(out.logits, y);
      loss_sum += loss;
      ++batches;
    }

    const ForwardOutput val_out = net.forward(data.val_x);
    const double val_loss = objective.validation_loss(val_out.logits, data.val_y);
    if (!std::isfinite(val_loss)) {
      throw TrainingFailure("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0, val_loss, lr});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.network = net;
      objective.on_new_best();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  objective.restore_best();
  return result;
}

TrainingArrays holdout_arrays(const Matrix& x, const Vector& y, double val_fraction, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) throw InvalidInput("holdout_arrays: validation fraction leaves an empty partition");
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "holdout"));
  rng.shuffle(std::span<std::size_t>(order));
  const IndexList val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const IndexList train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  TrainingArrays arrays;
  arrays.train_x = select_rows(x, train);
  arrays.val_x = select_rows(x, val);
  arrays.train_y.resize(static_cast<Eigen::Index>(train.size()));
  arrays.val_y.resize(static_cast<Eigen::Index>(val.size()));
  for (std::size_t i = 0; i < train.size(); ++i) arrays.train_y(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(train[i]));
  for (std::size_t i = 0; i < val.size(); ++i) arrays.val_y(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(val[i]));
  return arrays;
}

TrainingArrays classification_arrays(const data::LabeledDataset& data) {
  TrainingArrays arrays;
  arrays.train_x = data.features_in(data::Split::kTrain);
  const LabelList train_labels = data.labels_in(data::Split::kTrain);
  arrays.train_y = to_targets(train_labels);
  arrays.val_x = data.features_in(data::Split::kVal);
  arrays.val_y = to_targets(data.labels_in(data::Split::kVal));
  const std::set<int> classes(train_labels.begin(), train_labels.end());
  if (classes.size() < 2) throw InvalidInput("train_classifier: training split holds fewer than 2 classes");
  if (arrays.val_x.rows() == 0) throw InvalidInput("train_classifier: no validation split");
  return arrays;
}

TrainResult train_classifier(const data::LabeledDataset& data, const Architecture& arch, double gauss_lambda,
                             const OptimizerConfig& config) {
  TrainingArrays arrays = classification_arrays(data);
  if (static_cast<std::size_t>(arrays.train_x.rows()) < 2 * config.batch_size) {
    throw InvalidInput("train_classifier: needs at least 2 * batch_size training rows");
  }
  if (static_cast<int>(arch.output_dim) < data.num_classes()) {
    throw InvalidInput("train_classifier: architecture has fewer outputs than classes");
  }
  Rng init_rng(derive_seed(config.seed, "init"));
  CrossEntropyObjective objective;
  return train_network(Network(arch, init_rng), objective, arrays, config, gauss_lambda);
}

}  // namespace spectre::nn
