#pragma once

#include "spectre/common/types.hpp"
#include "spectre/signals/bundle.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spectre::detector {

using signals::Signal;
using signals::SignalBundle;

/// Synthetic outliers used only for direction correction and ranking.
struct PseudoOodSet {
  Matrix features;
  std::size_t mixes = 0;
  std::size_t noise = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxPseudoOod = 2000;
inline constexpr double kMixAlphaLow = 1.2;
inline constexpr double kMixAlphaHigh = 3.0;

/// Half extrapolating mixtures a*x_a + (1-a)*x_b with a ~ U[1.2, 3], half
/// draws from N(0, 4 * cov(train)). `n_total` is capped at 2000.
PseudoOodSet gen_pseudo_ood(const Matrix& train, std::size_t n_total, std::uint64_t seed);

/// Below this percentile spread a signal is treated as constant.
inline constexpr double kDegenerateSpread = 1e-12;

/// min(3, max(0, (raw - q1) / (q99 - q1))); all zeros when degenerate.
Vector normalize_signal(const Vector& raw, double q1, double q99);

/// Fixed orientation for signals whose direction is known a priori.
enum class DirectionRule { kAutomatic, kAlwaysFlip, kNeverFlip };
DirectionRule direction_rule(Signal s);

/// True when the normalized values should be negated so that pseudo-OOD
/// values are larger on average.
bool should_flip(Signal s, const Vector& val_normalized, const Vector& ood_normalized);

struct SignalCalibration {
  Signal signal = Signal::kGauss;
  double q1 = 0.0;
  double q99 = 0.0;
  bool flipped = false;
  bool degenerate = false;
  double rho = 0.5;

  /// Normalized and direction-corrected values.
  Vector transform(const Vector& raw) const;
};

inline constexpr double kDefaultTau = 0.72;

struct CalibrationOptions {
  double tau = kDefaultTau;
  std::optional<std::size_t> force_k;  // overrides the threshold rule
};

struct CalibrationState {
  std::vector<SignalCalibration> signals;  // canonical order
  std::vector<Signal> ranking;             // rho descending, ties in canonical order
  std::size_t k = 1;
  double tau = kDefaultTau;

  const SignalCalibration& get(Signal s) const;
  std::vector<Signal> selected() const { return {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k)}; }
};

/// Ranks per-signal calibrations by rho and chooses k (1 iff max rho >= tau).
CalibrationState rank_and_select(std::vector<SignalCalibration> signals, const CalibrationOptions& options = {});

/// Percentiles from validation rows, direction and rho from validation (0)
/// vs pseudo-OOD (1). Both bundles must carry the same signals.
CalibrationState calibrate(const SignalBundle& val_raw, const SignalBundle& ood_raw,
                           const CalibrationOptions& options = {});

/// Mean of the top-k corrected signals per row; higher means more anomalous.
Vector fuse(const CalibrationState& state, const SignalBundle& raw);

}  // namespace spectre::detector
