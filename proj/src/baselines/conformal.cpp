#include "spectre/baselines/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spectre::baselines {

double conformal_quantile(std::vector<double> scores, double alpha) {
  if (scores.empty()) throw InvalidInput("conformal_quantile: no calibration scores");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("conformal_quantile: alpha must be in (0, 1)");
  const double n = static_cast<double>(scores.size());
  // Guard against (n + 1)(1 - alpha) landing a hair above an integer.
  const auto rank = static_cast<std::size_t>(std::ceil((n + 1.0) * (1.0 - alpha) - 1e-9));
  if (rank > scores.size()) return std::numeric_limits<double>::infinity();
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(rank - 1), scores.end());
  return scores[rank - 1];
}

namespace {

void check(const Matrix& probs, const LabelList& labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) throw InvalidInput("conformal: rows and labels differ");
  for (int l : labels) {
    if (l < 0 || l >= probs.cols()) throw InvalidInput("conformal: label out of range");
  }
}

std::vector<Eigen::Index> descending(const Matrix& probs, Eigen::Index r) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(probs.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return probs(r, a) > probs(r, b); });
  return order;
}

}  // namespace

Vector lac_scores(const Matrix& probs, const LabelList& labels) {
  check(probs, labels);
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) out(r) = 1.0 - probs(r, labels[static_cast<std::size_t>(r)]);
  return out;
}

Vector lac_set_sizes(const Matrix& probs, double q) {
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) out(r) = static_cast<double>((probs.row(r).array() >= 1.0 - q).count());
  return out;
}

Vector entropy_scores(const Matrix& probs) {
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double h = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      if (probs(r, c) > 0.0) h -= probs(r, c) * std::log(probs(r, c));
    }
    out(r) = h;
  }
  return out;
}

Vector entropy_set_sizes(const Matrix& probs, double q) {
  const Vector h = entropy_scores(probs);
  return h.unaryExpr([&](double v) { return v <= q ? 1.0 : static_cast<double>(probs.cols()); });
}

Vector aps_scores(const Matrix& probs, const LabelList& labels) {
  check(probs, labels);
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double cum = 0.0;
    for (Eigen::Index c : descending(probs, r)) {
      cum += probs(r, c);
      if (c == labels[static_cast<std::size_t>(r)]) break;
    }
    out(r) = cum;
  }
  return out;
}

Vector aps_set_sizes(const Matrix& probs, double q) {
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double cum = 0.0;
    double size = 0.0;
    for (Eigen::Index c : descending(probs, r)) {
      cum += probs(r, c);
      if (cum > q + 1e-12) break;
      size += 1.0;
    }
    out(r) = size;
  }
  return out;
}

}  // namespace spectre::baselines
