#pragma once

#include "spectre/baselines/logistic.hpp"
#include "spectre/data/dataset.hpp"
#include "spectre/data/preprocess.hpp"
#include "spectre/nn/serialize.hpp"
#include "spectre/nn/trainer.hpp"
#include "spectre/signals/learned.hpp"
#include "spectre/signals/mahalanobis.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spectre::baselines {

enum class BaselineKind {
  kDeepEnsembles,
  kMCDropout,
  kBNNLaplace,
  kBENN,
  kEvidential,
  kDUQ,
  kConformal,
  kUTraCE,
  kCQRAPS,
  kODIN,
  kMahalanobis,
  kUSD,
};

inline constexpr std::array<BaselineKind, 12> kAllBaselines{
    BaselineKind::kDeepEnsembles, BaselineKind::kMCDropout, BaselineKind::kBNNLaplace, BaselineKind::kBENN,
    BaselineKind::kEvidential,    BaselineKind::kDUQ,       BaselineKind::kConformal,  BaselineKind::kUTraCE,
    BaselineKind::kCQRAPS,        BaselineKind::kODIN,      BaselineKind::kMahalanobis, BaselineKind::kUSD};

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline(const std::string& name);

struct BaselineOptions {
  std::vector<std::size_t> hidden{128, 128};
  double dropout = 0.2;
  double mc_dropout = 0.3;  // MCDropout and BENN
  nn::OptimizerConfig optimizer = default_optimizer();
  std::size_t ensemble_size = 5;
  std::size_t mc_passes = 30;
  double alpha = 0.1;            // conformal miscoverage
  double benn_entropy_bonus = 0.1;
  double evidential_anneal_epochs = 10.0;
  double duq_length_scale = 0.5;
  double duq_decay = 0.99;
  double logistic_l2 = 1.0;
  double odin_temperature = 1000.0;
  double odin_epsilon = 0.002;
  std::size_t usd_epochs = 20;

  /// Adam (no weight decay), lr 1e-3, 30 epochs, patience 5, cosine schedule.
  static nn::OptimizerConfig default_optimizer();
};

struct BaselineOutput {
  Vector scores;                // higher means more anomalous
  std::optional<Matrix> probs;  // class probabilities where the method defines them
};

/// Fitted baseline. Inputs to `score` are raw features; the detector applies
/// the standardizer fitted on the training rows.
class BaselineDetector {
 public:
  BaselineKind kind() const { return kind_; }
  BaselineOutput score(const Matrix& features) const;

  const std::vector<nn::Network>& networks() const { return nets_; }
  const data::Standardizer& standardizer() const { return standardizer_; }
  const std::optional<double>& conformal_threshold() const { return threshold_; }
  const std::vector<Vector>& centroids() const { return centroids_; }

  nn::Json to_json() const;
  static BaselineDetector from_json(const nn::Json& j);

 private:
  friend BaselineDetector fit_baseline(BaselineKind, const data::LabeledDataset&, std::uint64_t,
                                       const BaselineOptions&);

  Matrix classifier_probs(const Matrix& z) const;
  Matrix mc_probs(const Matrix& z) const;

  BaselineKind kind_ = BaselineKind::kDeepEnsembles;
  data::Standardizer standardizer_;
  std::vector<nn::Network> nets_;
  std::optional<LogisticRegression> logistic_;
  std::optional<signals::MahalanobisModel> mahalanobis_;
  std::vector<Vector> centroids_;
  std::optional<double> threshold_;
  double length_scale_ = 0.5;
  std::size_t mc_passes_ = 30;
  std::uint64_t mc_seed_ = 0;
  double odin_temperature_ = 1000.0;
  double odin_epsilon_ = 0.002;
};

/// Trains on the train split; conformal variants calibrate on the val split.
/// Test-tagged rows are refused. Training failures name the baseline.
BaselineDetector fit_baseline(BaselineKind kind, const data::LabeledDataset& data, std::uint64_t seed,
                              const BaselineOptions& options = {});

}  // namespace spectre::baselines
