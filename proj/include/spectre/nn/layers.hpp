#pragma once

#include "spectre/common/rng.hpp"
#include "spectre/common/types.hpp"

namespace spectre::nn {

/// Lower bound on the singular-value estimate used as a divisor.
inline constexpr double kSpectralFloor = 1e-12;

/// Fully connected layer `y = x W^T + b`, optionally spectrally normalized.
///
/// With spectral normalization the effective weight is `W / sigma`, where
/// `sigma = u^T W v` is the running power-iteration estimate of the top
/// singular value. `u` and `v` persist across training steps; inference uses
/// whatever estimate was current when training stopped.
struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  bool has_spectral_norm = false;
  Vector spectral_u;  // out, unit norm
  Vector spectral_v;  // in, unit norm
  double sigma = 1.0;

  /// Fan-in scaled uniform initialization, U(-1/sqrt(in), 1/sqrt(in)).
  static DenseLayer initialized(std::size_t in, std::size_t out, bool spectral, Rng& rng);

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }

  /// u^T W v for the stored direction vectors (the quantity `sigma` caches).
  double spectral_estimate() const { return spectral_u.dot(weight * spectral_v); }
  double weight_scale() const {
    return has_spectral_norm ? 1.0 / std::max(spectral_estimate(), kSpectralFloor) : 1.0;
  }
  Matrix effective_weight() const { return weight * weight_scale(); }

  /// One power-iteration step: v <- W^T u / |.|, u <- W v / |.|, sigma <- u^T W v.
  void power_iteration();

  /// Resets u to a random unit vector and runs one power-iteration step.
  void reset_spectral_state(Rng& rng);
};

/// Runs one power-iteration step on a copy of `layer` and returns it.
/// The copy's `effective_weight()` has estimated top singular value 1.
DenseLayer spectral_normalize(DenseLayer layer);

/// Learnable affine batch normalization with running statistics.
struct BatchNormState {
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  static BatchNormState initialized(std::size_t width);
  std::size_t width() const { return static_cast<std::size_t>(gamma.size()); }
};

}  // namespace spectre::nn
