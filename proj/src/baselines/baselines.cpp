#include "spectre/baselines/baselines.hpp"

#include "spectre/baselines/conformal.hpp"
#include "spectre/baselines/objectives.hpp"
#include "spectre/signals/serialize.hpp"
#include "spectre/signals/signals.hpp"

#include <algorithm>

namespace spectre::baselines {

using nn::Json;

namespace {

constexpr const char* kFormat = "spectre.baseline/1";

struct KindName {
  BaselineKind kind;
  const char* name;
};

constexpr std::array<KindName, 12> kNames{{{BaselineKind::kDeepEnsembles, "DeepEnsembles"},
                                           {BaselineKind::kMCDropout, "MCDropout"},
                                           {BaselineKind::kBNNLaplace, "BNN_Laplace"},
                                           {BaselineKind::kBENN, "BENN"},
                                           {BaselineKind::kEvidential, "Evidential"},
                                           {BaselineKind::kDUQ, "DUQ"},
                                           {BaselineKind::kConformal, "Conformal"},
                                           {BaselineKind::kUTraCE, "UTraCE"},
                                           {BaselineKind::kCQRAPS, "CQR_APS"},
                                           {BaselineKind::kODIN, "ODIN"},
                                           {BaselineKind::kMahalanobis, "Mahalanobis"},
                                           {BaselineKind::kUSD, "USD"}}};

Vector neg_max(const Matrix& probs) { return -probs.rowwise().maxCoeff(); }

}  // namespace

std::string to_string(BaselineKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

BaselineKind parse_baseline(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw InvalidInput("unknown baseline '" + name + "'");
}

nn::OptimizerConfig BaselineOptions::default_optimizer() {
  nn::OptimizerConfig c;
  c.max_epochs = 30;
  c.patience = 5;
  c.weight_decay = 0.0;
  return c;
}

BaselineDetector fit_baseline(BaselineKind kind, const data::LabeledDataset& raw, std::uint64_t seed,
                              const BaselineOptions& options) {
  raw.validate();
  if (!raw.rows_in(data::Split::kTest).empty()) {
    throw InvalidInput(to_string(kind) + " fit: dataset contains test rows; pass only train and val rows");
  }
  BaselineDetector det;
  det.kind_ = kind;
  det.standardizer_ = data::Standardizer::fit(raw);
  const data::LabeledDataset data = det.standardizer_.apply(raw);
  const nn::TrainingArrays arrays = nn::classification_arrays(data);
  const std::size_t d = data.cols();
  const auto classes = static_cast<std::size_t>(std::max(2, data.num_classes()));
  det.mc_passes_ = options.mc_passes;
  det.mc_seed_ = derive_seed(seed, "mc");
  det.odin_temperature_ = options.odin_temperature;
  det.odin_epsilon_ = options.odin_epsilon;
  det.length_scale_ = options.duq_length_scale;

  const auto train = [&](nn::Objective& objective, double dropout, std::size_t outputs, const std::string& tag) {
    nn::OptimizerConfig config = options.optimizer;
    config.seed = derive_seed(seed, tag);
    Rng init(derive_seed(config.seed, "init"));
    const nn::Architecture arch{d, options.hidden, outputs, dropout, false, false};
    try {
      return nn::train_network(nn::Network(arch, init), objective, arrays, config).network;
    } catch (const TrainingFailure& e) {
      throw TrainingFailure(to_string(kind) + ": " + e.what());
    }
  };
  const auto train_ce = [&](double dropout, const std::string& tag, double entropy_bonus = 0.0) {
    nn::CrossEntropyObjective objective(entropy_bonus);
    return train(objective, dropout, classes, tag);
  };

  const Matrix& train_x = arrays.train_x;
  const LabelList train_labels = data.labels_in(data::Split::kTrain);
  const LabelList val_labels = data.labels_in(data::Split::kVal);

  switch (kind) {
    case BaselineKind::kDeepEnsembles:
      for (std::size_t i = 0; i < options.ensemble_size; ++i) {
        det.nets_.push_back(train_ce(options.dropout, "member-" + std::to_string(i)));
      }
      break;
    case BaselineKind::kMCDropout:
      det.nets_.push_back(train_ce(options.mc_dropout, "net"));
      break;
    case BaselineKind::kBENN:
      det.nets_.push_back(train_ce(options.mc_dropout, "net", options.benn_entropy_bonus));
      break;
    case BaselineKind::kBNNLaplace: {
      det.nets_.push_back(train_ce(0.0, "net"));
      LogisticOptions lo;
      lo.l2 = options.logistic_l2;
      det.logistic_ = fit_logistic(det.nets_[0].forward(train_x).features, train_labels, classes, lo);
      break;
    }
    case BaselineKind::kEvidential: {
      EvidentialObjective objective(options.evidential_anneal_epochs);
      det.nets_.push_back(train(objective, options.dropout, classes, "net"));
      break;
    }
    case BaselineKind::kDUQ: {
      const std::size_t dims = options.hidden.back();
      DuqObjective objective(classes, dims, options.duq_length_scale, options.duq_decay);
      det.nets_.push_back(train(objective, options.dropout, dims, "net"));
      det.centroids_ = objective.centroids();
      break;
    }
    case BaselineKind::kConformal:
    case BaselineKind::kUTraCE:
    case BaselineKind::kCQRAPS: {
      det.nets_.push_back(train_ce(options.dropout, "net"));
      const Matrix probs = nn::softmax(det.nets_[0].forward(arrays.val_x).logits);
      const Vector cal = kind == BaselineKind::kConformal ? lac_scores(probs, val_labels)
                         : kind == BaselineKind::kUTraCE  ? entropy_scores(probs)
                                                          : aps_scores(probs, val_labels);
      det.threshold_ = conformal_quantile(std::vector<double>(cal.data(), cal.data() + cal.size()), options.alpha);
      break;
    }
    case BaselineKind::kODIN:
      det.nets_.push_back(train_ce(options.dropout, "net"));
      break;
    case BaselineKind::kMahalanobis:
      det.nets_.push_back(train_ce(options.dropout, "net"));
      det.mahalanobis_ = signals::fit_mahalanobis(det.nets_[0].forward(train_x).features, train_labels,
                                                  signals::FeatureSpace::kPlainFeatures);
      break;
    case BaselineKind::kUSD: {
      signals::UsdOptions uo;
      uo.noise = signals::UsdNoise::kPerFeature;
      uo.epochs = options.usd_epochs;
      uo.batch_size = options.optimizer.batch_size;
      try {
        det.nets_.push_back(signals::train_usd(train_x, derive_seed(seed, "usd"), uo).net);
      } catch (const TrainingFailure& e) {
        throw TrainingFailure(std::string("USD: ") + e.what());
      }
      break;
    }
  }
  return det;
}

Matrix BaselineDetector::classifier_probs(const Matrix& z) const {
  Matrix mean = Matrix::Zero(z.rows(), static_cast<Eigen::Index>(nets_.front().output_dim()));
  for (const auto& net : nets_) mean += nn::softmax(net.forward(z).logits);
  return mean / static_cast<double>(nets_.size());
}

Matrix BaselineDetector::mc_probs(const Matrix& z) const {
  Rng rng(mc_seed_);
  const nn::Network& net = nets_.front();
  Matrix mean = Matrix::Zero(z.rows(), static_cast<Eigen::Index>(net.output_dim()));
  for (std::size_t i = 0; i < mc_passes_; ++i) {
    mean += nn::softmax(net.forward(z, nn::Mode::kMonteCarlo, &rng).logits);
  }
  return mean / static_cast<double>(mc_passes_);
}

BaselineOutput BaselineDetector::score(const Matrix& features) const {
  if (nets_.empty()) throw InvalidInput(to_string(kind_) + ": detector is not fitted");
  if (features.cols() != standardizer_.means.size()) {
    throw InvalidInput(to_string(kind_) + " score: expected " + std::to_string(standardizer_.means.size()) +
                       " features, got " + std::to_string(features.cols()));
  }
  const Matrix z = standardizer_.apply(features);
  BaselineOutput out;
  switch (kind_) {
    case BaselineKind::kDeepEnsembles:
      out.probs = classifier_probs(z);
      out.scores = neg_max(*out.probs);
      break;
    case BaselineKind::kMCDropout:
    case BaselineKind::kBENN:
      out.probs = mc_probs(z);
      out.scores = neg_max(*out.probs);
      break;
    case BaselineKind::kBNNLaplace:
      out.probs = logistic_->predict_proba(nets_[0].forward(z).features);
      out.scores = neg_max(*out.probs);
      break;
    case BaselineKind::kEvidential: {
      const Matrix alpha = dirichlet_alpha(nets_[0].forward(z).logits);
      out.probs = alpha.array().colwise() / alpha.rowwise().sum().array();
      out.scores = vacuity(alpha);
      break;
    }
    case BaselineKind::kDUQ:
      out.scores = -rbf_activations(nets_[0].forward(z).logits, centroids_, length_scale_).rowwise().maxCoeff();
      break;
    case BaselineKind::kConformal:
      out.probs = classifier_probs(z);
      out.scores = lac_set_sizes(*out.probs, *threshold_);
      break;
    case BaselineKind::kUTraCE:
      out.probs = classifier_probs(z);
      out.scores = entropy_set_sizes(*out.probs, *threshold_);
      break;
    case BaselineKind::kCQRAPS:
      out.probs = classifier_probs(z);
      out.scores = aps_set_sizes(*out.probs, *threshold_);
      break;
    case BaselineKind::kODIN:
      out.probs = classifier_probs(z);
      out.scores = -signals::odin_scores({&nets_[0]}, z, odin_temperature_, odin_epsilon_);
      break;
    case BaselineKind::kMahalanobis:
      out.probs = classifier_probs(z);
      out.scores = mahalanobis_->min_distances(nets_[0].forward(z).features);
      break;
    case BaselineKind::kUSD:
      out.scores = nn::softmax(nets_[0].forward(z).logits).col(1);
      break;
  }
  for (Eigen::Index r = 0; r < out.scores.size(); ++r) {
    if (!std::isfinite(out.scores(r))) {
      throw InvalidInput(to_string(kind_) + ": non-finite score at row " + std::to_string(r));
    }
  }
  return out;
}

Json BaselineDetector::to_json() const {
  Json nets = Json::array();
  for (const auto& net : nets_) nets.push_back(nn::network_to_json(net));
  Json centroids = Json::array();
  for (const Vector& c : centroids_) centroids.push_back(nn::vector_to_json(c));
  Json j{{"format", kFormat},
         {"kind", to_string(kind_)},
         {"standardizer", {{"means", nn::vector_to_json(standardizer_.means)}, {"stds", nn::vector_to_json(standardizer_.stds)}}},
         {"networks", nets},
         {"centroids", centroids},
         {"length_scale", length_scale_},
         {"mc_passes", mc_passes_},
         {"mc_seed", mc_seed_},
         {"odin_temperature", odin_temperature_},
         {"odin_epsilon", odin_epsilon_},
         {"threshold", threshold_ ? Json(*threshold_) : Json(nullptr)},
         {"logistic", nullptr},
         {"mahalanobis", nullptr}};
  // JSON has no infinity; an unbounded conformal threshold is stored as a string.
  if (threshold_ && std::isinf(*threshold_)) j["threshold"] = "inf";
  if (logistic_) {
    j["logistic"] = {{"weights", nn::matrix_to_json(logistic_->weights)},
                     {"iterations", logistic_->iterations},
                     {"gradient_norm", logistic_->gradient_norm}};
  }
  if (mahalanobis_) j["mahalanobis"] = signals::mahalanobis_to_json(*mahalanobis_);
  return j;
}

BaselineDetector BaselineDetector::from_json(const Json& j) {
  if (!j.contains("format") || j.at("format") != kFormat) {
    throw InvalidInput("not a baseline bundle (expected format " + std::string(kFormat) + ")");
  }
  BaselineDetector det;
  det.kind_ = parse_baseline(j.at("kind").get<std::string>());
  det.standardizer_.means = nn::vector_from_json(j.at("standardizer").at("means"));
  det.standardizer_.stds = nn::vector_from_json(j.at("standardizer").at("stds"));
  for (const Json& net : j.at("networks")) det.nets_.push_back(nn::network_from_json(net));
  for (const Json& c : j.at("centroids")) det.centroids_.push_back(nn::vector_from_json(c));
  det.length_scale_ = j.at("length_scale").get<double>();
  det.mc_passes_ = j.at("mc_passes").get<std::size_t>();
  det.mc_seed_ = j.at("mc_seed").get<std::uint64_t>();
  det.odin_temperature_ = j.at("odin_temperature").get<double>();
  det.odin_epsilon_ = j.at("odin_epsilon").get<double>();
  const Json& t = j.at("threshold");
  if (t.is_string()) {
    det.threshold_ = std::numeric_limits<double>::infinity();
  } else if (!t.is_null()) {
    det.threshold_ = t.get<double>();
  }
  if (!j.at("logistic").is_null()) {
    LogisticRegression lr;
    lr.weights = nn::matrix_from_json(j.at("logistic").at("weights"));
    lr.iterations = j.at("logistic").at("iterations").get<std::size_t>();
    lr.gradient_norm = j.at("logistic").at("gradient_norm").get<double>();
    det.logistic_ = std::move(lr);
  }
  if (!j.at("mahalanobis").is_null()) det.mahalanobis_ = signals::mahalanobis_from_json(j.at("mahalanobis"));
  return det;
}

}  // namespace spectre::baselines
