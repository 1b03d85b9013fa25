#pragma once

#include "spectre/signals/learned.hpp"
#include "spectre/signals/mahalanobis.hpp"
#include "spectre/signals/signals.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace spectre::signals {

/// Raw signal values, one column per signal, in canonical order.
struct SignalBundle {
  std::vector<Signal> names;
  Matrix values;  // rows x names.size()

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  bool has(Signal s) const;
  Vector column(Signal s) const;
  SignalBundle without(Signal s) const;
  SignalBundle only(const std::vector<Signal>& keep) const;
};

/// One column per signal plus a header row.
void write_bundle_csv(const std::filesystem::path& path, const SignalBundle& bundle);

/// Every fitted component the raw signals are computed from.
struct SignalModels {
  std::vector<nn::Network> ensemble;  // GaussEnc members
  nn::Network plain;
  MahalanobisModel plain_features;
  MahalanobisModel input_space;
  UsdClassifier usd;
  std::optional<CausalModel> causal;
  double odin_temperature = 1000.0;
  double odin_epsilon = 0.002;
};

/// Member-averaged softmax of the ensemble.
Matrix ensemble_mean_probs(const SignalModels& models, const Matrix& x);

/// Computes all signals for standardized inputs `x`. Causal is included only
/// when fitted. Refuses non-finite values, naming the signal and row.
SignalBundle extract_bundle(const SignalModels& models, const Matrix& x);

}  // namespace spectre::signals
