#include "spectre/data/preprocess.hpp"

#include "spectre/common/rng.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace spectre::data {

Standardizer Standardizer::fit(const Matrix& rows) {
  if (rows.rows() < 2) throw InvalidInput("standardizer: fit needs at least 2 rows");
  Standardizer s;
  s.means = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - s.means.transpose();
  s.stds = (centered.array().square().colwise().mean()).sqrt().transpose();
  s.stds = s.stds.cwiseMax(kStdFloor);
  return s;
}

Standardizer Standardizer::fit(const LabeledDataset& data) { return fit(data.features_in(Split::kTrain)); }

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != means.size()) {
    throw InvalidInput("standardizer: expected width " + std::to_string(means.size()) + ", got " +
                       std::to_string(x.cols()));
  }
  Matrix out = x.rowwise() - means.transpose();
  return out * stds.cwiseInverse().asDiagonal();
}

LabeledDataset Standardizer::apply(LabeledDataset data) const {
  data.features = apply(data.features);
  return data;
}

namespace {

bool partitions_keep_classes(const LabeledDataset& data, const IndexList& order, std::size_t n_train) {
  const std::set<int> all(data.labels.begin(), data.labels.end());
  std::set<int> train;
  std::set<int> val;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train : val).insert(data.labels[order[i]]);
  return train == all && val == all;
}

}  // namespace

LabeledDataset split(LabeledDataset data, double train_frac, std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (n < 5) throw InvalidInput("split: needs at least 5 rows, got " + std::to_string(n));
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw InvalidInput("split: train_frac must lie in (0, 1)");
  if (data.labels.size() != n) throw InvalidInput("split: label count does not match rows");
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));

  Rng rng(derive_seed(seed, "split"));
  IndexList order(n);
  for (int attempt = 0; attempt <= 10; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    if (!partitions_keep_classes(data, order, n_train)) continue;
    data.split.assign(n, Split::kVal);
    for (std::size_t i = 0; i < n_train; ++i) data.split[order[i]] = Split::kTrain;
    return data;
  }
  throw InvalidInput("split: a partition lost a class after 10 reshuffles");
}

}  // namespace spectre::data
