#include "spectre/harness/datasets.hpp"

#include "spectre/common/rng.hpp"
#include "spectre/data/adult.hpp"
#include "spectre/data/generators.hpp"
#include "spectre/data/preprocess.hpp"
#include "spectre/data/table_io.hpp"

#include <numeric>

namespace spectre::harness {

namespace {

constexpr double kTrainFraction = 0.8;

IndexList permutation(std::size_t n, std::uint64_t seed) {
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

IndexList take(const IndexList& order, std::size_t begin, std::size_t count) {
  return IndexList(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(begin + count));
}

void build_synthetic(const ExperimentConfig& c, ExperimentData& out) {
  const std::string tag = out.name();
  data::SyntheticOptions opts;
  opts.noise = c.noise;
  data::LabeledDataset train = data::gen_synthetic(c.sizes.synthetic_train, "regular", derive_seed(out.seed, tag, "train"), opts);
  // Every test set is labeled with the training median.
  opts.label_threshold = data::synthetic_median(train);
  out.fit = data::split(std::move(train), kTrainFraction, derive_seed(out.seed, tag));
  out.tests["regular"] = data::gen_synthetic(c.sizes.synthetic_test, "regular", derive_seed(out.seed, tag, "regular"), opts);
  for (const auto& v : c.anomaly_variants(out.family)) {
    out.tests[v] = data::gen_synthetic(c.sizes.synthetic_test, v, derive_seed(out.seed, tag, v), opts);
  }
}

void build_gridworld(const ExperimentConfig& c, ExperimentData& out) {
  const std::string tag = out.name();
  out.fit = data::split(data::gen_gridworld(c.sizes.gridworld_train, "regular", derive_seed(out.seed, tag, "train")),
                        kTrainFraction, derive_seed(out.seed, tag));
  out.tests["regular"] = data::gen_gridworld(c.sizes.gridworld_test, "regular", derive_seed(out.seed, tag, "regular"));
  for (const auto& v : c.anomaly_variants(out.family)) {
    out.tests[v] = data::gen_gridworld(c.sizes.gridworld_test, v, derive_seed(out.seed, tag, v));
  }
}

// 80% of the file is the fitting partition; each test set draws its rows from
// the remaining pool, anomaly sets then receive the injection.
void build_adult(const ExperimentConfig& c, ExperimentData& out) {
  const std::string tag = out.name();
  const data::LabeledDataset all = data::load_adult_csv(c.adult_csv);
  const std::size_t n = all.rows();
  const auto n_fit = static_cast<std::size_t>(std::llround(kTrainFraction * static_cast<double>(n)));
  if (n_fit < 5 || n_fit >= n) throw InvalidInput("adult: too few usable rows (" + std::to_string(n) + ")");
  const IndexList order = permutation(n, derive_seed(out.seed, tag, "partition"));
  out.fit = data::split(all.subset(take(order, 0, n_fit)), kTrainFraction, derive_seed(out.seed, tag));
  out.fit_sources.push_back(c.adult_csv.string());

  const IndexList pool = take(order, n_fit, n - n_fit);
  const std::size_t m = std::min(c.sizes.adult_test, pool.size());
  const auto draw = [&](const std::string& name) {
    const IndexList pick = permutation(pool.size(), derive_seed(out.seed, tag, name));
    IndexList rows;
    for (std::size_t i = 0; i < m; ++i) rows.push_back(pool[pick[i]]);
    return data::with_split(all.subset(rows), data::Split::kTest);
  };
  out.tests["regular"] = draw("regular");
  out.test_sources["regular"] = c.adult_csv.string();
  for (const auto& v : c.anomaly_variants(out.family)) {
    out.tests[v] = data::inject_adult_anomaly(draw(v), v, derive_seed(out.seed, tag, v + "/inject"));
    out.test_sources[v] = c.adult_csv.string();
  }
}

void build_features(const ExperimentConfig& c, ExperimentData& out) {
  data::LabeledDataset table = data::load_feature_table(c.features_train);
  out.fit_sources.push_back(c.features_train.string());
  IndexList tagged;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.split[r] != data::Split::kTest) tagged.push_back(r);
  }
  if (tagged.empty()) {
    out.fit = data::split(std::move(table), kTrainFraction, derive_seed(out.seed, out.name()));
  } else {
    out.fit = table.subset(tagged);
  }
  const auto load = [&](const std::string& name) {
    const auto& path = c.features_tests.at(name);
    out.test_sources[name] = path.string();
    data::LabeledDataset t = data::with_split(data::load_feature_table(path), data::Split::kTest);
    t.meta.variant = name;
    if (t.cols() != out.fit.cols()) {
      throw InvalidInput("features: test table " + name + " has " + std::to_string(t.cols()) + " columns, training has " +
                         std::to_string(out.fit.cols()));
    }
    return t;
  };
  out.tests["regular"] = load("regular");
  for (const auto& v : c.anomaly_variants(out.family)) out.tests[v] = load(v);
}

}  // namespace

ExperimentData build_data(const ExperimentConfig& config, data::Family family, std::uint64_t seed) {
  ExperimentData out;
  out.family = family;
  out.seed = seed;
  switch (family) {
    case data::Family::kSynthetic: build_synthetic(config, out); break;
    case data::Family::kGridworld: build_gridworld(config, out); break;
    case data::Family::kAdult: build_adult(config, out); break;
    case data::Family::kFeatures: build_features(config, out); break;
  }
  return out;
}

}  // namespace spectre::harness
