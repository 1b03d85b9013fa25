#pragma once

#include "spectre/common/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spectre::metrics {

// Labels: 0 = in-distribution, 1 = anomaly (positive class). Scores: higher
// means more anomalous.

/// Mann-Whitney AUROC with midranks for ties. Refuses single-class labels.
double auroc(const Vector& scores, const LabelList& labels);

/// Average precision over distinct score thresholds (step interpolation).
double aupr(const Vector& scores, const LabelList& labels);

/// FPR at the largest threshold t whose rule `score >= t` flags at least 95%
/// of the anomalies.
double fpr95(const Vector& scores, const LabelList& labels);

/// Error rate among rows whose max probability exceeds 0.9; empty when no
/// row qualifies.
std::optional<double> conf_err(const Matrix& probs, const LabelList& labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
  std::size_t count = 0;
};

MeanStd mean_std(const std::vector<double>& values);

/// "0.7488±0.0029".
std::string format_mean_std(const MeanStd& value, int digits = 4);

/// Scores and labels for an anomaly set paired with its regular reference.
struct PairedScores {
  Vector scores;
  LabelList labels;
};
PairedScores pair_scores(const Vector& regular, const Vector& anomaly);

}  // namespace spectre::metrics
