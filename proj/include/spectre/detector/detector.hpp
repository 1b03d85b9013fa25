#pragma once

#include "spectre/data/dataset.hpp"
#include "spectre/data/preprocess.hpp"
#include "spectre/detector/calibration.hpp"
#include "spectre/nn/trainer.hpp"
#include "spectre/signals/bundle.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace spectre::detector {

inline constexpr std::size_t kEnsembleSize = 5;

/// 2.0 for d <= 20, otherwise 0.5.
double default_gauss_lambda(std::size_t dims);

/// d -> 256 -> 128 -> C; spectral norm, batch norm, dropout 0.05.
nn::Architecture gaussenc_architecture(std::size_t dims, std::size_t classes);
/// Same shape without spectral norm, dropout 0.1.
nn::Architecture plainnet_architecture(std::size_t dims, std::size_t classes);

struct SpectreOptions {
  std::size_t ensemble_size = kEnsembleSize;
  std::optional<double> gauss_lambda;  // default_gauss_lambda(d) when empty
  nn::OptimizerConfig backbone;        // seed is overridden per member
  std::size_t pseudo_ood = kMaxPseudoOod;
  bool use_causal = true;              // still requires d <= 30
  signals::UsdOptions usd;
  signals::CausalOptions causal;
  std::size_t jobs = 1;                // ensemble members trained concurrently
};

/// Signal models and raw calibration bundles, before any signal selection.
/// Ablation variants recalibrate from this without retraining.
struct FittedSignals {
  data::Standardizer standardizer;
  signals::SignalModels models;
  PseudoOodSet pseudo_ood;
  SignalBundle val_raw;
  SignalBundle ood_raw;
  double gauss_lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t val_rows = 0;
};

/// Trains every backbone and signal model on the train split and computes
/// validation and pseudo-OOD bundles. `data` holds raw (unstandardized)
/// features with train and val rows; test-tagged rows are refused so that
/// test data cannot reach calibration.
FittedSignals fit_signals(const data::LabeledDataset& data, std::uint64_t seed, const SpectreOptions& options = {});

/// Which signals enter calibration.
struct SignalSelection {
  std::vector<Signal> exclude;
  std::optional<Signal> only;  // bypasses ranking
  std::optional<std::size_t> force_k;
  double tau = kDefaultTau;
};

class SpectreDetector {
 public:
  SpectreDetector() = default;
  SpectreDetector(data::Standardizer standardizer, signals::SignalModels models, CalibrationState calibration);

  /// Raw signal values on unstandardized `features`.
  SignalBundle raw_signals(const Matrix& features) const;
  /// Fused anomaly score; higher means more anomalous.
  Vector score(const Matrix& features) const;
  Vector score_bundle(const SignalBundle& raw) const { return fuse(calibration_, raw); }
  /// Ensemble-mean class probabilities.
  Matrix class_probs(const Matrix& features) const;

  const data::Standardizer& standardizer() const { return standardizer_; }
  const signals::SignalModels& models() const { return models_; }
  const CalibrationState& calibration() const { return calibration_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(standardizer_.means.size()); }

 private:
  void check_width(const Matrix& features) const;

  data::Standardizer standardizer_;
  signals::SignalModels models_;
  CalibrationState calibration_;
};

/// Calibrates a detector from fitted signals under a selection.
SpectreDetector make_detector(const FittedSignals& fitted, const SignalSelection& selection = {});
CalibrationState calibrate_selection(const FittedSignals& fitted, const SignalSelection& selection);
SignalBundle apply_selection(const SignalBundle& bundle, const SignalSelection& selection);

/// fit_signals followed by make_detector with the default selection.
SpectreDetector spectre_fit(const data::LabeledDataset& data, std::uint64_t seed, const SpectreOptions& options = {});

}  // namespace spectre::detector
