#include "spectre/common/rng.hpp"
#include "spectre/data/adult.hpp"
#include "spectre/data/generators.hpp"
#include "spectre/data/preprocess.hpp"
#include "spectre/data/table_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace spectre;
using namespace spectre::data;

namespace {

double correlation(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

double variance(const Vector& a) { return (a.array() - a.mean()).square().mean(); }

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return worst;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("synthetic generator") {
  const LabeledDataset train = gen_synthetic(10000, "regular", 1);
  CHECK(train.rows() == 10000);
  CHECK(train.cols() == 6);
  CHECK(gen_synthetic(2000, "confounder", 1).rows() == 2000);
  CHECK(std::abs(correlation(train.features.col(0), train.features.col(1)) - 0.8 / std::sqrt(0.73)) < 0.02);

  const LabeledDataset again = gen_synthetic(10000, "regular", 1);
  CHECK(again.features == train.features);
  CHECK(again.labels == train.labels);

  // Median split gives balanced classes on the training draw.
  const auto ones = std::count(train.labels.begin(), train.labels.end(), 1);
  CHECK(ones == 5000);

  // Test sets labeled by the training median.
  const double median = synthetic_median(train);
  const LabeledDataset test = gen_synthetic(500, "newvar", 2, {NoiseConvention::kStdDev, median});
  for (std::size_t i = 0; i < test.rows(); ++i) {
    CHECK(test.labels[i] == (test.features(static_cast<Eigen::Index>(i), 5) > median ? 1 : 0));
  }
  CHECK_THROWS_AS(gen_synthetic(10, "newobj", 1), InvalidInput);
}

TEST_CASE("synthetic base moments") {
  const LabeledDataset big = gen_synthetic(50000, "regular", 7);
  CHECK(std::abs(variance(big.features.col(0)) - 1.0) < 0.03);
  CHECK(std::abs(variance(big.features.col(1)) - 0.73) < 0.03);

  const LabeledDataset wide = gen_synthetic(50000, "regular", 7, {NoiseConvention::kVariance, std::nullopt});
  CHECK(std::abs(variance(wide.features.col(1)) - 0.94) < 0.03);
}

TEST_CASE("synthetic confounder leaves X1 untouched") {
  const LabeledDataset base = gen_synthetic(10000, "regular", 3);
  const LabeledDataset conf = gen_synthetic(10000, "confounder", 3);
  const auto col = [](const LabeledDataset& d) {
    return std::vector<double>(d.features.col(0).data(), d.features.col(0).data() + d.rows());
  };
  CHECK(ks_statistic(col(base), col(conf)) < 0.03);
  // X2 picks up the extra 0.36 variance from U.
  CHECK(variance(conf.features.col(1)) - variance(base.features.col(1)) > 0.25);
}

TEST_CASE("gridworld generator") {
  CHECK(gridworld_proximity(3, 4, 3, 4) == 1.0);
  CHECK(gridworld_reward("regular", 0, 1.0) == 1.5);
  CHECK(gridworld_reward("regular", 1, 0.5) == -0.5);
  CHECK(gridworld_reward("newobj", 0, 0.5) == 2.0);
  CHECK(gridworld_reward("newobj", 0, 0.2) == -0.5);
  CHECK(gridworld_reward("newobj", 0, 0.7) == 2.0);
  CHECK(gridworld_reward("mechanism", 0, 0.6) == 2.0);
  CHECK(gridworld_reward("mechanism", 1, 0.4) == -0.1);

  for (const std::string variant : {"regular", "newobj", "mechanism"}) {
    const LabeledDataset d = gen_gridworld(5000, variant, 5);
    CHECK(d.rows() == 5000);
    const Vector proximity = d.features.col(4);
    CHECK(proximity.minCoeff() > 0.0);
    CHECK(proximity.maxCoeff() <= 1.0);
    const Vector reward = d.features.col(5);
    const double lo = variant == "regular" ? -1.0 : (variant == "newobj" ? -0.5 : -2.0);
    const double hi = variant == "regular" ? 1.5 : 2.0;
    CHECK(reward.minCoeff() >= lo);
    CHECK(reward.maxCoeff() <= hi);
    CHECK(gen_gridworld(5000, variant, 5).features == d.features);
  }
  const LabeledDataset newobj = gen_gridworld(100, "newobj", 1);
  CHECK(std::all_of(newobj.labels.begin(), newobj.labels.end(), [](int l) { return l == 0; }));
}

TEST_CASE("adult loading and injection") {
  const auto path = temp_file("spectre_adult_fixture.csv");
  write_adult_fixture(path, 10500, 4);
  const LabeledDataset base = load_adult_csv(path);
  std::filesystem::remove(path);
  CHECK(base.rows() < 10500);  // rows with '?' dropped
  CHECK(base.rows() > 10000);
  CHECK(base.cols() == 26);
  const std::set<int> labels(base.labels.begin(), base.labels.end());
  CHECK(labels.size() == 2);

  const LabeledDataset same = inject_adult_anomaly(base, "regular", 1);
  CHECK(same.features == base.features);
  CHECK(same.labels == base.labels);

  const auto edu = static_cast<Eigen::Index>(*base.column_index("education-num"));
  const LabeledDataset conf = inject_adult_anomaly(base, "confounder", 1);
  const double raised =
      static_cast<double>(((conf.features.col(edu) - base.features.col(edu)).array().abs() > 0.5).count()) /
      static_cast<double>(base.rows());
  CHECK(std::abs(raised - 0.2) < 0.02);
  CHECK(conf.cols() == base.cols());

  const LabeledDataset mech = inject_adult_anomaly(base, "mechanism", 1);
  CHECK(mech.features == base.features);
  std::vector<double> sorted(base.features.col(edu).data(), base.features.col(edu).data() + base.rows());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[static_cast<std::size_t>(std::ceil(0.25 * sorted.size())) - 1];
  const double q3 = sorted[static_cast<std::size_t>(std::ceil(0.75 * sorted.size())) - 1];
  std::size_t middle = 0;
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < base.rows(); ++i) {
    const double e = base.features(static_cast<Eigen::Index>(i), edu);
    middle += e > q1 && e <= q3;
    flipped += mech.labels[i] != base.labels[i];
  }
  const double expected = 0.5 * static_cast<double>(middle) / static_cast<double>(base.rows());
  CHECK(std::abs(static_cast<double>(flipped) / static_cast<double>(base.rows()) - expected) < 0.02);

  const LabeledDataset newvar = inject_adult_anomaly(base, "newvar", 1);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < base.rows(); ++i) changed += newvar.labels[i] != base.labels[i];
  // About half the rows are eligible: 0.5 * 0.3 * 0.2 = 0.03.
  CHECK(std::abs(static_cast<double>(changed) / static_cast<double>(base.rows()) - 0.03) < 0.01);

  LabeledDataset stripped = base;
  stripped.meta.columns[1] = "schooling";
  try {
    inject_adult_anomaly(stripped, "newvar", 1);
    FAIL("expected refusal");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("education-num") != std::string::npos);
  }
  CHECK_THROWS_AS(inject_adult_anomaly(base, "interaction", 1), InvalidInput);
}

TEST_CASE("feature table round trips") {
  Rng rng(2);
  LabeledDataset d;
  d.features.resize(40, 5);
  for (Eigen::Index r = 0; r < 40; ++r) {
    for (Eigen::Index c = 0; c < 5; ++c) d.features(r, c) = rng.normal() * 10.0;
    d.labels.push_back(static_cast<int>(r % 3));
    d.split.push_back(r % 4 == 0 ? Split::kVal : Split::kTrain);
  }
  d.meta.columns = {"a", "b", "c", "d", "e"};

  const auto raw = temp_file("spectre_table.bin");
  write_feature_table(raw, d, TableFormat::kRawFloat);
  const LabeledDataset r = load_feature_table(raw);
  std::filesystem::remove(raw);
  CHECK(r.labels == d.labels);
  CHECK((r.features - d.features.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);

  const auto csv = temp_file("spectre_table.csv");
  write_feature_table(csv, d, TableFormat::kCsv);
  const LabeledDataset c = load_feature_table(csv);
  std::filesystem::remove(csv);
  CHECK(c.features == d.features);
  CHECK(c.split == d.split);
  CHECK(c.meta.columns == d.meta.columns);
}

TEST_CASE("feature table errors name the location") {
  const auto csv = temp_file("spectre_ragged.csv");
  {
    std::ofstream out(csv);
    for (int c = 0; c < 512; ++c) out << "f" << c << ',';
    out << "label\n";
    for (int row = 0; row < 3; ++row) {
      const int width = row == 1 ? 511 : 512;
      for (int c = 0; c < width; ++c) out << 0.5 << ',';
      out << 1 << '\n';
    }
  }
  try {
    load_feature_table(csv);
    FAIL("expected refusal");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  {
    std::ofstream out(csv);
    out << "x,label\n1.0,0\nabc,1\n";
  }
  try {
    load_feature_table(csv);
    FAIL("expected refusal");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("row 2, column 'x'") != std::string::npos);
  }
  {
    std::ofstream out(csv);
    out << "x,y\n1.0,0\n";
  }
  CHECK_THROWS_AS(load_feature_table(csv), InvalidInput);
  std::filesystem::remove(csv);

  const auto raw = temp_file("spectre_short.bin");
  {
    std::ofstream out(raw, std::ios::binary);
    out.write(kRawMagic, 8);
    const std::uint32_t rows = 4;
    const std::uint32_t cols = 513;
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    const float zero = 0.0f;
    for (int i = 0; i < 100; ++i) out.write(reinterpret_cast<const char*>(&zero), 4);
  }
  CHECK_THROWS_AS(load_feature_table(raw), InvalidInput);
  std::filesystem::remove(raw);
}

TEST_CASE("standardizer") {
  Matrix x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const Standardizer s = Standardizer::fit(x);
  CHECK(s.stds(1) == 1e-8);
  const Matrix z = s.apply(x);
  CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(z.col(0).mean()) < 1e-9);
  CHECK(std::abs(std::sqrt(z.col(0).squaredNorm() / 4.0) - 1.0) < 1e-9);

  // Train columns (0, 2) and (10, 14): means 1, 12; stds 1, 2.
  Matrix train(2, 2);
  train << 0, 10, 2, 14;
  Matrix shifted(1, 2);
  shifted << 4, 12;
  const Matrix t = Standardizer::fit(train).apply(shifted);
  CHECK(t(0, 0) == doctest::Approx(3.0));
  CHECK(t(0, 1) == doctest::Approx(0.0));

  Rng rng(1);
  Matrix wide(300, 3);
  for (Eigen::Index i = 0; i < wide.size(); ++i) wide.data()[i] = 5.0 + 3.0 * rng.normal();
  const Matrix zw = Standardizer::fit(wide).apply(wide);
  CHECK(zw.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(Standardizer::fit(Matrix::Zero(1, 3)), InvalidInput);
}

TEST_CASE("split") {
  LabeledDataset d;
  d.features = Matrix::Zero(1000, 2);
  for (int i = 0; i < 1000; ++i) d.labels.push_back(i % 2);
  d.split.assign(1000, Split::kTest);
  const LabeledDataset s = split(d, 0.8, 3);
  CHECK(s.rows_in(Split::kTrain).size() == 800);
  CHECK(s.rows_in(Split::kVal).size() == 200);
  CHECK(split(d, 0.8, 3).split == s.split);
  CHECK(split(d, 0.8, 4).split != s.split);

  LabeledDataset tiny;
  tiny.features = Matrix::Zero(10, 1);
  tiny.labels = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
  tiny.split.assign(10, Split::kTest);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    try {
      const LabeledDataset t = split(tiny, 0.8, seed);
      std::set<int> train_classes;
      std::set<int> val_classes;
      for (std::size_t i = 0; i < 10; ++i) (t.split[i] == Split::kTrain ? train_classes : val_classes).insert(t.labels[i]);
      CHECK(train_classes.size() == 2);
      CHECK(val_classes.size() == 2);
    } catch (const InvalidInput&) {
      // Refusal after exhausting reshuffles is allowed; silent class loss is not.
    }
  }
  CHECK_THROWS_AS(split(tiny.subset({0, 1, 2, 3}), 0.8, 1), InvalidInput);
}
