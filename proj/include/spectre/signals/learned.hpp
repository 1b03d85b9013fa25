#pragma once

#include "spectre/common/types.hpp"
#include "spectre/nn/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spectre::signals {

/// Noise used as the "unknown" class when training a USD classifier.
enum class UsdNoise {
  kScaledCovariance,  // N(0, 4 * Sigma_hat)
  kPerFeature,        // independent N(mean_j, (2 * std_j)^2)
};

std::string to_string(UsdNoise noise);

/// Binary train-vs-noise classifier, d -> 128 -> 64 -> 2.
struct UsdClassifier {
  nn::Network net;
  UsdNoise noise = UsdNoise::kScaledCovariance;
  std::size_t noise_rows = 0;

  /// Softmax probability of the noise class.
  Vector scores(const Matrix& x) const;
};

struct UsdOptions {
  UsdNoise noise = UsdNoise::kScaledCovariance;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
};

/// Requires at least 2 * d training rows. Noise count equals train count.
UsdClassifier train_usd(const Matrix& train, std::uint64_t seed, const UsdOptions& options = {});

/// Per-variable residual regressors f_j(x_{-j}) with hidden sizes (64, 32).
struct CausalModel {
  std::vector<nn::Network> regressors;
  Vector sigma;  // residual std per variable on the training rows, floored

  std::size_t dims() const { return regressors.size(); }
  /// -(1/d) * sum_j ((x_j - f_j(x_{-j})) / sigma_j)^2 per row.
  Vector scores(const Matrix& x) const;
};

inline constexpr double kCausalSigmaFloor = 1e-6;
inline constexpr std::size_t kCausalMaxDims = 30;

struct CausalOptions {
  std::size_t max_epochs = 300;
  std::size_t patience = 10;
  std::size_t batch_size = 128;
  double validation_fraction = 0.1;
};

/// Requires 2 <= d <= 30.
CausalModel fit_causal(const Matrix& train, std::uint64_t seed, const CausalOptions& options = {});

/// Columns of `x` except `skip`.
Matrix drop_column(const Matrix& x, Eigen::Index skip);

}  // namespace spectre::signals
