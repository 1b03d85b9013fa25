#include "../support/metric_oracles.hpp"

#include "spectre/data/generators.hpp"
#include "spectre/detector/persist.hpp"
#include "spectre/metrics/metrics.hpp"

#include <doctest.h>

#include <filesystem>

using namespace spectre;
using namespace spectre::detector;
using signals::Signal;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

SignalCalibration with_rho(Signal s, double rho) {
  SignalCalibration c;
  c.signal = s;
  c.rho = rho;
  return c;
}

SpectreOptions quick_options() {
  SpectreOptions o;
  o.backbone.max_epochs = 3;
  o.backbone.patience = 2;
  o.causal.patience = 2;
  o.usd.epochs = 3;
  o.causal.max_epochs = 5;
  o.pseudo_ood = 400;
  return o;
}

data::LabeledDataset small_synthetic(std::uint64_t seed) {
  return data::split(data::gen_synthetic(1500, "regular", seed), 0.8, seed);
}

}  // namespace

TEST_CASE("pseudo-OOD composition") {
  Rng rng(1);
  Matrix train(300, 3);
  for (Eigen::Index r = 0; r < train.rows(); ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) train(r, c) = rng.normal();
  }
  const PseudoOodSet set = gen_pseudo_ood(train, 2000, 9);
  CHECK(set.features.rows() == 2000);
  CHECK(set.mixes == 1000);
  CHECK(set.noise == 1000);
  CHECK(gen_pseudo_ood(train, 5000, 9).features.rows() == 2000);
  CHECK(gen_pseudo_ood(train, 2000, 9).features == set.features);
  CHECK(gen_pseudo_ood(train, 2000, 10).features != set.features);
  CHECK_THROWS_AS(gen_pseudo_ood(train.topRows(1), 10, 0), InvalidInput);

  // Each mix lies on the line through two training rows, beyond x_a's end:
  // with alpha > 1, x_mix - x_a = (alpha - 1)(x_a - x_b) points away from x_b.
  // Recover alpha via least squares against every pair is costly; instead use
  // a two-row training set where the pair is fixed.
  Matrix two(2, 2);
  two << 0.0, 0.0, 1.0, 2.0;
  const PseudoOodSet pair = gen_pseudo_ood(two, 200, 3);
  for (Eigen::Index r = 0; r < 100; ++r) {
    const double t = pair.features(r, 0);  // position along the segment, since x = (t, 2t)
    CHECK(pair.features(r, 1) == doctest::Approx(2.0 * t));
    CHECK((t < -0.2 + 1e-12 || t > 1.2 - 1e-12));
    CHECK(std::abs(t) <= 3.0 + 1e-12);
  }
}

TEST_CASE("percentile normalization") {
  const Vector raw = vec({-5.0, 1.0, 2.0, 3.0, 100.0});
  const Vector n = normalize_signal(raw, 1.0, 3.0);
  CHECK(n(0) == 0.0);
  CHECK(n(1) == 0.0);
  CHECK(n(2) == 0.5);
  CHECK(n(3) == 1.0);
  CHECK(n(4) == 3.0);
  CHECK(normalize_signal(raw, 2.0, 2.0) == Vector::Zero(5));
}

TEST_CASE("direction correction") {
  CHECK_FALSE(should_flip(Signal::kGauss, vec({0, 0, 0}), vec({1, 1, 1})));
  CHECK(should_flip(Signal::kGauss, vec({1, 1}), vec({0, 0})));
  CHECK(should_flip(Signal::kODIN, vec({0, 0}), vec({1, 1})));
  CHECK_FALSE(should_flip(Signal::kUSD, vec({1, 1}), vec({0, 0})));
  CHECK_THROWS_AS(should_flip(Signal::kGauss, Vector(), vec({1})), InvalidInput);
}

TEST_CASE("ranking and top-k selection") {
  std::vector<SignalCalibration> cals;
  for (Signal s : signals::kAllSignals) cals.push_back(with_rho(s, 0.6));
  cals[4].rho = 0.95;
  CalibrationState state = rank_and_select(cals);
  CHECK(state.k == 1);
  CHECK(state.ranking.front() == Signal::kEntropy);
  CHECK(state.ranking.size() == 9);

  for (auto& c : cals) c.rho = 0.65;
  state = rank_and_select(cals);
  CHECK(state.k == 2);
  // Ties resolve in canonical order.
  for (std::size_t i = 0; i < 9; ++i) CHECK(state.ranking[i] == signals::kAllSignals[i]);

  cals[8].rho = 0.72;
  CHECK(rank_and_select(cals).k == 1);
  cals[8].rho = 0.7199;
  CHECK(rank_and_select(cals).k == 2);
  CHECK(rank_and_select(cals, CalibrationOptions{0.72, 1}).k == 1);
  CHECK_THROWS_AS(rank_and_select({}), InvalidInput);
}

TEST_CASE("calibration from raw bundles") {
  SignalBundle val;
  SignalBundle ood;
  val.names = ood.names = {Signal::kGauss, Signal::kInMaha, Signal::kEnergy, Signal::kUSD};
  Rng rng(2);
  val.values.resize(500, 4);
  ood.values.resize(300, 4);
  for (Eigen::Index r = 0; r < 500; ++r) val.values.row(r) << rng.normal(), 7.0, rng.normal(), rng.normal();
  for (Eigen::Index r = 0; r < 300; ++r) {
    ood.values.row(r) << rng.normal() + 10.0, 7.0, rng.normal() - 10.0, rng.normal() + 0.3;
  }
  const CalibrationState state = calibrate(val, ood);
  const auto& gauss = state.get(Signal::kGauss);
  CHECK_FALSE(gauss.flipped);
  CHECK(gauss.rho == 1.0);  // perfectly separated
  // Clipping at 0 ties the lowest validation rows with every pseudo-OOD row.
  const auto& energy = state.get(Signal::kEnergy);
  CHECK(energy.flipped);
  CHECK(energy.rho >= 0.99);
  CHECK(energy.rho < 1.0);
  CHECK(state.get(Signal::kInMaha).degenerate);
  CHECK(state.get(Signal::kInMaha).rho == 0.5);
  CHECK(state.ranking.front() == Signal::kGauss);
  CHECK(state.k == 1);

  // rho agrees with the brute-force pairwise oracle.
  const auto& usd = state.get(Signal::kUSD);
  const Vector v = usd.transform(val.column(Signal::kUSD));
  const Vector o = usd.transform(ood.column(Signal::kUSD));
  const metrics::PairedScores p = metrics::pair_scores(v, o);
  CHECK(usd.rho == doctest::Approx(spectre::testing::brute_auroc(p.scores, p.labels)).epsilon(1e-12));

  // After correction the pseudo-OOD mean is at least the validation mean.
  for (const auto& c : state.signals) {
    if (direction_rule(c.signal) != DirectionRule::kAutomatic) continue;
    CHECK(c.transform(ood.column(c.signal)).mean() >= c.transform(val.column(c.signal)).mean());
  }

  SignalBundle other = ood;
  other.names = {Signal::kGauss, Signal::kMI, Signal::kUSD};
  CHECK_THROWS_AS(calibrate(val, other), InvalidInput);
}

TEST_CASE("fusion arithmetic") {
  SignalBundle raw;
  raw.names = {Signal::kGauss, Signal::kEnergy};
  raw.values.resize(1, 2);
  raw.values << 1.0, 2.0;
  CalibrationState state;
  for (Signal s : raw.names) {
    SignalCalibration c;
    c.signal = s;
    c.q1 = 0.0;
    c.q99 = 1.0;
    state.signals.push_back(c);
  }
  state.ranking = {Signal::kGauss, Signal::kEnergy};
  state.k = 2;
  CHECK(fuse(state, raw)(0) == 1.5);
  state.k = 1;
  CHECK(fuse(state, raw)(0) == 1.0);
}

TEST_CASE("lambda rule and architectures") {
  CHECK(default_gauss_lambda(6) == 2.0);
  CHECK(default_gauss_lambda(20) == 2.0);
  CHECK(default_gauss_lambda(21) == 0.5);
  CHECK(default_gauss_lambda(512) == 0.5);
  const nn::Architecture g = gaussenc_architecture(6, 2);
  CHECK(g.hidden == std::vector<std::size_t>{256, 128});
  CHECK(g.spectral_norm);
  CHECK(g.dropout == 0.05);
  CHECK_FALSE(plainnet_architecture(6, 2).spectral_norm);
}

TEST_CASE("end-to-end fit, score and persistence") {
  const data::LabeledDataset data = small_synthetic(3);
  const FittedSignals fitted = fit_signals(data, 42, quick_options());
  CHECK(fitted.models.ensemble.size() == 5);
  CHECK(fitted.gauss_lambda == 2.0);
  CHECK(fitted.models.causal.has_value());
  CHECK(fitted.val_raw.names.size() == 9);
  CHECK(fitted.val_raw.rows() == fitted.val_rows);
  CHECK(fitted.ood_raw.rows() == 400);
  CHECK(fitted.pseudo_ood.mixes == 200);

  const SpectreDetector det = make_detector(fitted);
  const data::LabeledDataset test = data::gen_synthetic(300, "confounder", 7);
  const Vector s1 = det.score(test.features);
  const Vector s2 = det.score(test.features);
  CHECK(s1.size() == 300);
  CHECK(s1 == s2);
  CHECK(s1.allFinite());

  // k = 1: ranking by S equals ranking by the top corrected signal wherever
  // the normalized value is strictly inside the clip range.
  SignalSelection single;
  single.force_k = 1;
  const SpectreDetector one = make_detector(fitted, single);
  const Signal top = one.calibration().ranking.front();
  const SignalCalibration& cal = one.calibration().get(top);
  const SignalBundle raw = one.raw_signals(test.features);
  const Vector fused = one.score_bundle(raw);
  const Vector corrected = cal.transform(raw.column(top));
  CHECK(fused == corrected);
  const Vector top_raw = raw.column(top);
  for (Eigen::Index i = 0; i < 300; ++i) {
    for (Eigen::Index j = 0; j < 300; ++j) {
      const double ai = std::abs(corrected(i));
      const double aj = std::abs(corrected(j));
      if (ai <= 0 || ai >= 3 || aj <= 0 || aj >= 3) continue;
      const bool raw_less = cal.flipped ? top_raw(i) > top_raw(j) : top_raw(i) < top_raw(j);
      if (raw_less) CHECK(fused(i) < fused(j));
    }
  }

  // Selections.
  SignalSelection only;
  only.only = Signal::kInMaha;
  const CalibrationState only_state = calibrate_selection(fitted, only);
  CHECK(only_state.k == 1);
  CHECK(only_state.ranking == std::vector<Signal>{Signal::kInMaha});
  SignalSelection minus;
  minus.exclude = {Signal::kUSD};
  CHECK(calibrate_selection(fitted, minus).ranking.size() == 8);

  CHECK_THROWS_AS(det.score(Matrix::Zero(3, 5)), InvalidInput);

  const auto path = std::filesystem::temp_directory_path() / "spectre_detector_test.cbor";
  save_detector(path, det, {{"seed", 42}});
  const SpectreDetector loaded = load_detector(path);
  CHECK(loaded.score(test.features) == s1);
  CHECK(nn::read_cbor(path).at("manifest").at("seed") == 42);
  std::filesystem::remove(path);
}

TEST_CASE("fit refuses test rows and wide data omits causal") {
  data::LabeledDataset data = small_synthetic(4);
  data.split[0] = data::Split::kTest;
  CHECK_THROWS_AS(fit_signals(data, 1, quick_options()), InvalidInput);

  Rng rng(3);
  data::LabeledDataset wide;
  wide.features.resize(600, 40);
  for (Eigen::Index r = 0; r < 600; ++r) {
    const int label = static_cast<int>(r % 2);
    for (Eigen::Index c = 0; c < 40; ++c) wide.features(r, c) = rng.normal() + (c == 0 ? 2.0 * label : 0.0);
    wide.labels.push_back(label);
  }
  wide = data::split(wide, 0.8, 1);
  const FittedSignals fitted = fit_signals(wide, 1, quick_options());
  CHECK_FALSE(fitted.models.causal.has_value());
  CHECK(fitted.gauss_lambda == 0.5);
  CHECK(fitted.val_raw.names.size() == 8);
}
