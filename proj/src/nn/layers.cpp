#include "spectre/nn/layers.hpp"

#include <cmath>

namespace spectre::nn {

DenseLayer DenseLayer::initialized(std::size_t in, std::size_t out, bool spectral, Rng& rng) {
  DenseLayer layer;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
  }
  layer.bias.resize(static_cast<Eigen::Index>(out));
  for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-bound, bound);
  layer.has_spectral_norm = spectral;
  if (spectral) layer.reset_spectral_state(rng);
  return layer;
}

void DenseLayer::power_iteration() {
  if (!has_spectral_norm) return;
  Vector v = weight.transpose() * spectral_u;
  const double v_norm = v.norm();
  if (v_norm > kSpectralFloor) spectral_v = v / v_norm;
  Vector u = weight * spectral_v;
  const double u_norm = u.norm();
  if (u_norm > kSpectralFloor) spectral_u = u / u_norm;
  sigma = spectral_u.dot(weight * spectral_v);
}

void DenseLayer::reset_spectral_state(Rng& rng) {
  spectral_u.resize(weight.rows());
  for (Eigen::Index i = 0; i < spectral_u.size(); ++i) spectral_u(i) = rng.normal();
  const double norm = spectral_u.norm();
  if (norm > 0.0) {
    spectral_u /= norm;
  } else {
    spectral_u.setZero();
    spectral_u(0) = 1.0;
  }
  spectral_v = Vector::Zero(weight.cols());
  if (spectral_v.size() > 0) spectral_v(0) = 1.0;
  power_iteration();
}

DenseLayer spectral_normalize(DenseLayer layer) {
  if (!layer.has_spectral_norm) throw InvalidInput("spectral_normalize: layer carries no spectral state");
  layer.power_iteration();
  return layer;
}

BatchNormState BatchNormState::initialized(std::size_t width) {
  const auto w = static_cast<Eigen::Index>(width);
  return BatchNormState{Vector::Ones(w), Vector::Zero(w), Vector::Zero(w), Vector::Ones(w)};
}

}  // namespace spectre::nn
