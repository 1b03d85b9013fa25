#include "../support/metric_oracles.hpp"

#include "spectre/metrics/metrics.hpp"

#include <doctest.h>

using namespace spectre;
using namespace spectre::metrics;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("auroc examples") {
  CHECK(auroc(vec({0.1, 0.2, 0.8, 0.9}), {0, 0, 1, 1}) == 1.0);
  CHECK(auroc(vec({0.5, 0.5, 0.5, 0.5}), {0, 1, 0, 1}) == 0.5);
  CHECK(auroc(vec({0.1, 0.4, 0.35, 0.8}), {0, 0, 1, 1}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(auroc(vec({0.1, 0.2}), {1, 1}), InvalidInput);
}

TEST_CASE("auroc properties") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto [s, y] = testing::random_instance(rng);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += 1e-9 * static_cast<double>(i);  // break ties
    CHECK(auroc(s, y) + auroc(-s, y) == doctest::Approx(1.0).epsilon(1e-12));
    const Vector transformed = s.array().exp() * 3.0 + 1.0;
    CHECK(auroc(transformed, y) == auroc(s, y));
  }
}

TEST_CASE("aupr examples") {
  CHECK(aupr(vec({0.9, 0.8, 0.1, 0.05}), {1, 1, 0, 0}) == 1.0);
  CHECK(aupr(vec({0.9, 0.8, 0.7}), {1, 0, 1}) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK_THROWS_AS(aupr(vec({0.9, 0.8}), {0, 0}), InvalidInput);

  Rng rng(3);
  Vector s(10000);
  LabelList y(10000);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = rng.uniform();
    y[static_cast<std::size_t>(i)] = rng.bernoulli(0.3) ? 1 : 0;
  }
  CHECK(std::abs(aupr(s, y) - 0.3) < 0.05);
}

TEST_CASE("fpr95 examples") {
  CHECK(fpr95(vec({0.1, 0.2, 0.8, 0.9}), {0, 0, 1, 1}) == 0.0);

  Rng rng(4);
  Vector s(20000);
  LabelList y(20000);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = rng.normal();
    y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
  }
  CHECK(std::abs(fpr95(s, y) - 0.95) < 0.02);

  // 20 anomalies at 1..20 and 20 normals at 0.5..19.5: the threshold 2 flags
  // exactly 19 anomalies and the 18 normals above it.
  Vector sweep(40);
  LabelList labels(40);
  for (int i = 0; i < 20; ++i) {
    sweep(i) = i + 1.0;
    labels[static_cast<std::size_t>(i)] = 1;
    sweep(20 + i) = i + 0.5;
    labels[static_cast<std::size_t>(20 + i)] = 0;
  }
  CHECK(fpr95(sweep, labels) == doctest::Approx(18.0 / 20.0));
  CHECK_THROWS_AS(fpr95(vec({0.3}), {1}), InvalidInput);
}

TEST_CASE("conf_err") {
  Matrix good(2, 2);
  good << 0.95, 0.05, 0.02, 0.98;
  CHECK(conf_err(good, {0, 1}).value() == 0.0);

  Matrix uniform = Matrix::Constant(4, 2, 0.5);
  CHECK_FALSE(conf_err(uniform, {0, 1, 0, 1}).has_value());

  Matrix mixed(2, 2);
  mixed << 0.95, 0.05, 0.99, 0.01;
  CHECK(conf_err(mixed, {0, 1}).value() == 0.5);
}

TEST_CASE("metrics agree with brute-force oracles") {
  Rng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [s, y] = testing::random_instance(rng);
    mismatches += std::abs(auroc(s, y) - testing::brute_auroc(s, y)) > 1e-12;
    mismatches += std::abs(aupr(s, y) - testing::brute_aupr(s, y)) > 1e-12;
    mismatches += std::abs(fpr95(s, y) - testing::brute_fpr95(s, y)) > 1e-12;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("aggregation and formatting") {
  const MeanStd m = mean_std({0.7, 0.8, 0.75});
  CHECK(m.mean == doctest::Approx(0.75));
  CHECK(m.std == doctest::Approx(0.05));
  CHECK(format_mean_std({0.7488, 0.0029, 5}) == "0.7488±0.0029");
  CHECK(mean_std({0.5}).std == 0.0);

  const PairedScores p = pair_scores(vec({1, 2}), vec({3}));
  CHECK(p.labels == LabelList{0, 0, 1});
  CHECK(p.scores(2) == 3.0);
}
