#include "spectre/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace spectre::metrics {

namespace {

struct Counts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Counts check_inputs(const Vector& scores, const LabelList& labels, const char* name) {
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    throw InvalidInput(std::string(name) + ": scores and labels differ in length");
  }
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidInput(std::string(name) + ": labels must be 0 or 1");
    if (!std::isfinite(scores(static_cast<Eigen::Index>(i)))) {
      throw InvalidInput(std::string(name) + ": non-finite score at row " + std::to_string(i));
    }
    (labels[i] == 1 ? c.positives : c.negatives)++;
  }
  return c;
}

// Row indices sorted by descending score.
std::vector<std::size_t> descending(const Vector& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

}  // namespace

double auroc(const Vector& scores, const LabelList& labels) {
  const Counts c = check_inputs(scores, labels, "auroc");
  if (c.positives == 0 || c.negatives == 0) throw InvalidInput("auroc: both classes must be present");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
  });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const double value = scores(static_cast<Eigen::Index>(order[i]));
    while (j < order.size() && scores(static_cast<Eigen::Index>(order[j])) == value) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double aupr(const Vector& scores, const LabelList& labels) {
  const Counts c = check_inputs(scores, labels, "aupr");
  if (c.positives == 0) throw InvalidInput("aupr: no positive rows");
  const std::vector<std::size_t> order = descending(scores);
  double area = 0.0;
  double previous_recall = 0.0;
  std::size_t tp = 0;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = scores(static_cast<Eigen::Index>(order[i]));
    while (i < order.size() && scores(static_cast<Eigen::Index>(order[i])) == value) {
      tp += labels[order[i]] == 1;
      ++flagged;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(c.positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(flagged);
    area += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  return area;
}

double fpr95(const Vector& scores, const LabelList& labels) {
  const Counts c = check_inputs(scores, labels, "fpr95");
  if (c.positives == 0 || c.negatives == 0) throw InvalidInput("fpr95: both classes must be present");
  const std::vector<std::size_t> order = descending(scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = scores(static_cast<Eigen::Index>(order[i]));
    while (i < order.size() && scores(static_cast<Eigen::Index>(order[i])) == value) {
      (labels[order[i]] == 1 ? tp : fp)++;
      ++i;
    }
    if (20 * tp >= 19 * c.positives) return static_cast<double>(fp) / static_cast<double>(c.negatives);
  }
  return 1.0;
}

std::optional<double> conf_err(const Matrix& probs, const LabelList& labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) {
    throw InvalidInput("conf_err: probability rows and labels differ in length");
  }
  std::size_t confident = 0;
  std::size_t wrong = 0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    if (std::abs(probs.row(r).sum() - 1.0) > 1e-6) {
      throw InvalidInput("conf_err: row " + std::to_string(r) + " does not sum to 1");
    }
    Eigen::Index best = 0;
    const double top = probs.row(r).maxCoeff(&best);
    if (top <= 0.9) continue;
    ++confident;
    wrong += best != labels[static_cast<std::size_t>(r)];
  }
  if (confident == 0) return std::nullopt;
  return static_cast<double>(wrong) / static_cast<double>(confident);
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_mean_std(const MeanStd& value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f±%.*f", digits, value.mean, digits, value.std);
  return buf;
}

PairedScores pair_scores(const Vector& regular, const Vector& anomaly) {
  PairedScores out;
  out.scores.resize(regular.size() + anomaly.size());
  out.scores << regular, anomaly;
  out.labels.assign(static_cast<std::size_t>(regular.size()), 0);
  out.labels.insert(out.labels.end(), static_cast<std::size_t>(anomaly.size()), 1);
  return out;
}

}  // namespace spectre::metrics
