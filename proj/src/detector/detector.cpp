#include "spectre/detector/detector.hpp"

#include <algorithm>
#include <future>

namespace spectre::detector {

double default_gauss_lambda(std::size_t dims) { return dims <= 20 ? 2.0 : 0.5; }

nn::Architecture gaussenc_architecture(std::size_t dims, std::size_t classes) {
  nn::Architecture arch{dims, {256, 128}, classes, 0.05, true, true};
  arch.relu_penultimate = false;
  return arch;
}

nn::Architecture plainnet_architecture(std::size_t dims, std::size_t classes) {
  nn::Architecture arch{dims, {256, 128}, classes, 0.1, false, true};
  arch.relu_penultimate = false;
  return arch;
}

namespace {

nn::Network train_backbone(const data::LabeledDataset& data, const nn::Architecture& arch, double lambda,
                           nn::OptimizerConfig config, std::uint64_t seed, const std::string& component) {
  config.seed = seed;
  try {
    return nn::train_classifier(data, arch, lambda, config).network;
  } catch (const TrainingFailure& e) {
    throw TrainingFailure(component + ": " + e.what());
  }
}

}  // namespace

FittedSignals fit_signals(const data::LabeledDataset& raw, std::uint64_t seed, const SpectreOptions& options) {
  raw.validate();
  if (!raw.rows_in(data::Split::kTest).empty()) {
    throw InvalidInput("spectre fit: dataset contains test rows; pass only train and val rows");
  }
  if (options.ensemble_size == 0) throw InvalidInput("spectre fit: ensemble size must be positive");

  FittedSignals fitted;
  fitted.seed = seed;
  fitted.standardizer = data::Standardizer::fit(raw);
  const data::LabeledDataset data = fitted.standardizer.apply(raw);
  const Matrix train = data.features_in(data::Split::kTrain);
  const Matrix val = data.features_in(data::Split::kVal);
  const LabelList train_labels = data.labels_in(data::Split::kTrain);
  fitted.train_rows = static_cast<std::size_t>(train.rows());
  fitted.val_rows = static_cast<std::size_t>(val.rows());

  const std::size_t d = data.cols();
  const auto classes = static_cast<std::size_t>(std::max(2, data.num_classes()));
  fitted.gauss_lambda = options.gauss_lambda.value_or(default_gauss_lambda(d));

  signals::SignalModels& m = fitted.models;
  const nn::Architecture g_arch = gaussenc_architecture(d, classes);
  m.ensemble.resize(options.ensemble_size);
  const auto member = [&](std::size_t i) {
    return train_backbone(data, g_arch, fitted.gauss_lambda, options.backbone, seed + i,
                          "GaussEnc member " + std::to_string(i));
  };
  if (options.jobs > 1) {
    for (std::size_t start = 0; start < options.ensemble_size; start += options.jobs) {
      std::vector<std::future<nn::Network>> pending;
      const std::size_t stop = std::min(options.ensemble_size, start + options.jobs);
      for (std::size_t i = start; i < stop; ++i) pending.push_back(std::async(std::launch::async, member, i));
      for (std::size_t i = start; i < stop; ++i) m.ensemble[i] = pending[i - start].get();
    }
  } else {
    for (std::size_t i = 0; i < options.ensemble_size; ++i) m.ensemble[i] = member(i);
  }
  m.plain = train_backbone(data, plainnet_architecture(d, classes), 0.0, options.backbone,
                           derive_seed(seed, "plainnet"), "PlainNet");

  m.plain_features = signals::fit_mahalanobis(m.plain.forward(train).features, train_labels,
                                              signals::FeatureSpace::kPlainFeatures);
  m.input_space = signals::fit_mahalanobis(train, train_labels, signals::FeatureSpace::kInput);
  try {
    m.usd = signals::train_usd(train, derive_seed(seed, "usd"), options.usd);
  } catch (const TrainingFailure& e) {
    throw TrainingFailure(std::string("USD: ") + e.what());
  }
  if (options.use_causal && d >= 2 && d <= signals::kCausalMaxDims) {
    try {
      m.causal = signals::fit_causal(train, derive_seed(seed, "causal"), options.causal);
    } catch (const TrainingFailure& e) {
      throw TrainingFailure(std::string("Causal: ") + e.what());
    }
  }

  fitted.pseudo_ood = gen_pseudo_ood(train, options.pseudo_ood, derive_seed(seed, "pseudo-ood"));
  fitted.val_raw = signals::extract_bundle(m, val);
  fitted.ood_raw = signals::extract_bundle(m, fitted.pseudo_ood.features);
  return fitted;
}

SignalBundle apply_selection(const SignalBundle& bundle, const SignalSelection& selection) {
  if (selection.only) {
    if (!bundle.has(*selection.only)) {
      throw InvalidInput("signal " + signals::to_string(*selection.only) + " is not available");
    }
    return bundle.only({*selection.only});
  }
  SignalBundle out = bundle;
  for (Signal s : selection.exclude) out = out.without(s);
  if (out.names.empty()) throw InvalidInput("signal selection leaves no signals");
  return out;
}

CalibrationState calibrate_selection(const FittedSignals& fitted, const SignalSelection& selection) {
  CalibrationOptions options;
  options.tau = selection.tau;
  options.force_k = selection.only ? std::optional<std::size_t>(1) : selection.force_k;
  return calibrate(apply_selection(fitted.val_raw, selection), apply_selection(fitted.ood_raw, selection), options);
}

SpectreDetector make_detector(const FittedSignals& fitted, const SignalSelection& selection) {
  return SpectreDetector(fitted.standardizer, fitted.models, calibrate_selection(fitted, selection));
}

SpectreDetector spectre_fit(const data::LabeledDataset& data, std::uint64_t seed, const SpectreOptions& options) {
  return make_detector(fit_signals(data, seed, options));
}

SpectreDetector::SpectreDetector(data::Standardizer standardizer, signals::SignalModels models,
                                 CalibrationState calibration)
    : standardizer_(std::move(standardizer)), models_(std::move(models)), calibration_(std::move(calibration)) {}

void SpectreDetector::check_width(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_dim()) {
    throw InvalidInput("spectre score: expected " + std::to_string(input_dim()) + " features, got " +
                       std::to_string(features.cols()));
  }
}

SignalBundle SpectreDetector::raw_signals(const Matrix& features) const {
  check_width(features);
  return signals::extract_bundle(models_, standardizer_.apply(features));
}

Vector SpectreDetector::score(const Matrix& features) const { return fuse(calibration_, raw_signals(features)); }

Matrix SpectreDetector::class_probs(const Matrix& features) const {
  check_width(features);
  return signals::ensemble_mean_probs(models_, standardizer_.apply(features));
}

}  // namespace spectre::detector
