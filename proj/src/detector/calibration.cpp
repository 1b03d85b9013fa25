#include "spectre/detector/calibration.hpp"

#include "spectre/common/stats.hpp"
#include "spectre/metrics/metrics.hpp"

#include <algorithm>

namespace spectre::detector {

PseudoOodSet gen_pseudo_ood(const Matrix& train, std::size_t n_total, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (n < 2) throw InvalidInput("gen_pseudo_ood: needs at least 2 training rows");
  n_total = std::min(n_total, kMaxPseudoOod);
  PseudoOodSet set;
  set.seed = seed;
  set.mixes = n_total / 2;
  set.noise = n_total - set.mixes;
  set.features.resize(static_cast<Eigen::Index>(n_total), train.cols());

  Rng mix_rng(derive_seed(seed, "pseudo-ood-mix"));
  for (std::size_t i = 0; i < set.mixes; ++i) {
    const std::size_t a = mix_rng.index(n);
    std::size_t b = mix_rng.index(n - 1);
    if (b >= a) ++b;
    const double alpha = mix_rng.uniform(kMixAlphaLow, kMixAlphaHigh);
    set.features.row(static_cast<Eigen::Index>(i)) =
        alpha * train.row(static_cast<Eigen::Index>(a)) + (1.0 - alpha) * train.row(static_cast<Eigen::Index>(b));
  }
  Rng noise_rng(derive_seed(seed, "pseudo-ood-noise"));
  set.features.bottomRows(static_cast<Eigen::Index>(set.noise)) =
      sample_gaussian(Vector::Zero(train.cols()), 4.0 * empirical_covariance(train), set.noise, noise_rng);
  return set;
}

Vector normalize_signal(const Vector& raw, double q1, double q99) {
  const double spread = q99 - q1;
  if (!(spread >= kDegenerateSpread)) return Vector::Zero(raw.size());
  return ((raw.array() - q1) / spread).max(0.0).min(3.0).matrix();
}

DirectionRule direction_rule(Signal s) {
  switch (s) {
    case Signal::kODIN: return DirectionRule::kAlwaysFlip;
    case Signal::kUSD: return DirectionRule::kNeverFlip;
    default: return DirectionRule::kAutomatic;
  }
}

bool should_flip(Signal s, const Vector& val_normalized, const Vector& ood_normalized) {
  if (val_normalized.size() == 0 || ood_normalized.size() == 0) {
    throw InvalidInput("should_flip: empty population");
  }
  switch (direction_rule(s)) {
    case DirectionRule::kAlwaysFlip: return true;
    case DirectionRule::kNeverFlip: return false;
    case DirectionRule::kAutomatic: break;
  }
  return ood_normalized.mean() < val_normalized.mean();
}

Vector SignalCalibration::transform(const Vector& raw) const {
  Vector out = normalize_signal(raw, q1, q99);
  if (flipped) out = -out;
  return out;
}

const SignalCalibration& CalibrationState::get(Signal s) const {
  for (const auto& c : signals) {
    if (c.signal == s) return c;
  }
  throw InvalidInput("calibration has no signal " + signals::to_string(s));
}

CalibrationState rank_and_select(std::vector<SignalCalibration> signals, const CalibrationOptions& options) {
  if (signals.empty()) throw InvalidInput("rank_and_select: no signals");
  std::sort(signals.begin(), signals.end(), [](const auto& a, const auto& b) {
    return signals::canonical_index(a.signal) < signals::canonical_index(b.signal);
  });
  CalibrationState state;
  state.tau = options.tau;
  state.signals = signals;
  std::stable_sort(signals.begin(), signals.end(), [](const auto& a, const auto& b) { return a.rho > b.rho; });
  for (const auto& c : signals) state.ranking.push_back(c.signal);
  state.k = signals.front().rho >= options.tau ? 1 : 2;
  if (options.force_k) state.k = *options.force_k;
  state.k = std::clamp<std::size_t>(state.k, 1, state.ranking.size());
  return state;
}

CalibrationState calibrate(const SignalBundle& val_raw, const SignalBundle& ood_raw, const CalibrationOptions& options) {
  if (val_raw.names != ood_raw.names) throw InvalidInput("calibrate: validation and pseudo-OOD signals differ");
  if (val_raw.rows() == 0 || ood_raw.rows() == 0) throw InvalidInput("calibrate: empty population");
  std::vector<SignalCalibration> out;
  for (std::size_t c = 0; c < val_raw.names.size(); ++c) {
    SignalCalibration cal;
    cal.signal = val_raw.names[c];
    const Vector val = val_raw.values.col(static_cast<Eigen::Index>(c));
    const Vector ood = ood_raw.values.col(static_cast<Eigen::Index>(c));
    const std::vector<double> sorted(val.data(), val.data() + val.size());
    cal.q1 = quantile(sorted, 0.01);
    cal.q99 = quantile(sorted, 0.99);
    cal.degenerate = !(cal.q99 - cal.q1 >= kDegenerateSpread);
    if (cal.degenerate) {
      cal.rho = 0.5;
    } else {
      const Vector val_n = normalize_signal(val, cal.q1, cal.q99);
      const Vector ood_n = normalize_signal(ood, cal.q1, cal.q99);
      cal.flipped = should_flip(cal.signal, val_n, ood_n);
      const double sign = cal.flipped ? -1.0 : 1.0;
      const metrics::PairedScores paired = metrics::pair_scores(sign * val_n, sign * ood_n);
      cal.rho = metrics::auroc(paired.scores, paired.labels);
    }
    out.push_back(cal);
  }
  return rank_and_select(std::move(out), options);
}

Vector fuse(const CalibrationState& state, const SignalBundle& raw) {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(raw.rows()));
  const std::vector<Signal> chosen = state.selected();
  for (Signal s : chosen) total += state.get(s).transform(raw.column(s));
  return total / static_cast<double>(chosen.size());
}

}  // namespace spectre::detector
