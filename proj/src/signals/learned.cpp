#include "spectre/signals/learned.hpp"

#include "spectre/common/rng.hpp"
#include "spectre/common/stats.hpp"
#include "spectre/nn/losses.hpp"
#include "spectre/nn/trainer.hpp"

#include <cmath>

namespace spectre::signals {

std::string to_string(UsdNoise noise) {
  return noise == UsdNoise::kScaledCovariance ? "N(0, 4*cov)" : "N(mean, (2*std)^2) per feature";
}

Vector UsdClassifier::scores(const Matrix& x) const { return nn::softmax(net.forward(x).logits).col(1); }

UsdClassifier train_usd(const Matrix& train, std::uint64_t seed, const UsdOptions& options) {
  const auto n = static_cast<std::size_t>(train.rows());
  const auto d = static_cast<std::size_t>(train.cols());
  if (n < 2 * d || n < 4) throw InvalidInput("train_usd: needs at least 2 * d training rows");

  Rng rng(derive_seed(seed, "usd-noise"));
  Matrix noise;
  if (options.noise == UsdNoise::kScaledCovariance) {
    noise = sample_gaussian(Vector::Zero(train.cols()), 4.0 * empirical_covariance(train), n, rng);
  } else {
    const RowVector mean = train.colwise().mean();
    const RowVector sd = ((train.rowwise() - mean).array().square().colwise().mean()).sqrt();
    noise.resize(train.rows(), train.cols());
    for (Eigen::Index r = 0; r < noise.rows(); ++r) {
      for (Eigen::Index c = 0; c < noise.cols(); ++c) noise(r, c) = mean(c) + 2.0 * sd(c) * rng.normal();
    }
  }
  Matrix x(2 * train.rows(), train.cols());
  x << train, noise;
  Vector y(x.rows());
  y << Vector::Zero(train.rows()), Vector::Ones(train.rows());

  nn::OptimizerConfig config;
  config.max_epochs = options.epochs;
  config.patience = options.epochs - 1;
  config.batch_size = options.batch_size;
  config.seed = derive_seed(seed, "usd-train");
  const nn::TrainingArrays arrays = nn::holdout_arrays(x, y, 0.1, config.seed);
  Rng init(derive_seed(seed, "usd-init"));
  nn::CrossEntropyObjective objective;
  UsdClassifier clf;
  clf.net = nn::train_network(nn::Network(nn::Architecture{d, {128, 64}, 2}, init), objective, arrays, config).network;
  clf.noise = options.noise;
  clf.noise_rows = n;
  return clf;
}

Matrix drop_column(const Matrix& x, Eigen::Index skip) {
  Matrix out(x.rows(), x.cols() - 1);
  if (skip > 0) out.leftCols(skip) = x.leftCols(skip);
  if (skip + 1 < x.cols()) out.rightCols(x.cols() - skip - 1) = x.rightCols(x.cols() - skip - 1);
  return out;
}

Vector CausalModel::scores(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dims()) {
    throw InvalidInput("causal: expected width " + std::to_string(dims()) + ", got " + std::to_string(x.cols()));
  }
  Vector total = Vector::Zero(x.rows());
  for (std::size_t j = 0; j < dims(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Vector predicted = regressors[j].forward(drop_column(x, col)).logits.col(0);
    total += ((x.col(col) - predicted) / sigma(col)).array().square().matrix();
  }
  return -total / static_cast<double>(dims());
}

CausalModel fit_causal(const Matrix& train, std::uint64_t seed, const CausalOptions& options) {
  const auto d = static_cast<std::size_t>(train.cols());
  if (d < 2 || d > kCausalMaxDims) throw InvalidInput("fit_causal: needs 2 <= d <= 30, got " + std::to_string(d));
  CausalModel model;
  model.sigma.resize(train.cols());
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Matrix inputs = drop_column(train, col);
    const Vector target = train.col(col);
    nn::OptimizerConfig config;
    config.max_epochs = options.max_epochs;
    config.patience = options.patience;
    config.batch_size = options.batch_size;
    config.seed = derive_seed(seed, "causal", std::to_string(j));
    const nn::TrainingArrays arrays = nn::holdout_arrays(inputs, target, options.validation_fraction, config.seed);
    Rng init(derive_seed(config.seed, "init"));
    nn::MeanSquaredErrorObjective objective;
    nn::Network net = nn::train_network(nn::Network(nn::Architecture{d - 1, {64, 32}, 1}, init), objective, arrays,
                                        config)
                          .network;
    const Vector residual = target - net.forward(inputs).logits.col(0);
    model.sigma(col) = std::max(std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size())),
                                kCausalSigmaFloor);
    model.regressors.push_back(std::move(net));
  }
  return model;
}

}  // namespace spectre::signals
