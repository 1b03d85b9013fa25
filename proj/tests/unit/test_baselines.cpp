#include "fd.hpp"

#include "spectre/baselines/baselines.hpp"
#include "spectre/baselines/conformal.hpp"
#include "spectre/baselines/objectives.hpp"
#include "spectre/data/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace spectre;
using namespace spectre::baselines;
using doctest::Approx;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
  }
  return m;
}

Vector labels_vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

BaselineOptions quick() {
  BaselineOptions o;
  o.optimizer.max_epochs = 4;
  o.optimizer.patience = 3;
  o.optimizer.batch_size = 64;
  o.mc_passes = 5;
  o.usd_epochs = 3;
  return o;
}

}  // namespace

TEST_CASE("baseline names") {
  for (BaselineKind k : kAllBaselines) CHECK(parse_baseline(to_string(k)) == k);
  CHECK(to_string(BaselineKind::kBNNLaplace) == "BNN_Laplace");
  CHECK(to_string(BaselineKind::kCQRAPS) == "CQR_APS");
  CHECK_THROWS_AS(parse_baseline("Spectre"), InvalidInput);
}

TEST_CASE("dirichlet quantities") {
  Matrix alpha(1, 2);
  alpha << 5.0, 1.0;
  CHECK(vacuity(alpha)(0) == Approx(1.0 / 3.0).epsilon(1e-12));
  const Matrix p = alpha.array() / alpha.sum();
  CHECK(p(0, 0) == Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(p(0, 1) == Approx(1.0 / 6.0).epsilon(1e-12));

  Matrix logits(1, 2);
  logits << -60.0, -60.0;  // zero evidence
  CHECK(vacuity(dirichlet_alpha(logits))(0) == Approx(1.0).epsilon(1e-12));
  logits << 0.0, 0.0;
  CHECK(dirichlet_alpha(logits)(0, 0) == Approx(1.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("evidential loss gradient") {
  Rng rng(3);
  for (double kl : {0.0, 0.4, 1.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      Matrix logits = random_matrix(4, 3, rng, 2.0);
      const Vector y = labels_vec({0, 1, 2, 1});
      Matrix grad;
      evidential_loss(logits, y, kl, &grad);
      const Vector analytic = Eigen::Map<const Vector>(grad.data(), grad.size());
      CHECK(testing::max_fd_error(std::span<double>(logits.data(), static_cast<std::size_t>(logits.size())), analytic,
                                  [&] { return evidential_loss(logits, y, kl); }) < 1e-4);
    }
  }
}

TEST_CASE("evidential loss through network parameters") {
  Rng rng(8);
  nn::Network net(nn::Architecture{4, {5, 3}, 3, 0.0, false, false}, rng);
  const Matrix x = random_matrix(6, 4, rng);
  const Vector y = labels_vec({0, 1, 2, 0, 1, 2});
  nn::ForwardCache cache;
  const nn::ForwardOutput out = net.forward(x, nn::Mode::kTraining, nullptr, &cache);
  Matrix d_logits;
  evidential_loss(out.logits, y, 0.7, &d_logits);
  const Vector analytic = net.backward(cache, d_logits, nullptr, nullptr).flatten();
  double worst = 0.0;
  Eigen::Index offset = 0;
  for (auto span : net.parameters()) {
    const Vector slice = analytic.segment(offset, static_cast<Eigen::Index>(span.size()));
    worst = std::max(worst, testing::max_fd_error(span, slice, [&] {
      return evidential_loss(net.forward(x, nn::Mode::kTraining, nullptr).logits, y, 0.7);
    }));
    offset += static_cast<Eigen::Index>(span.size());
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("evidential annealing and trainability") {
  EvidentialObjective objective(10.0);
  objective.begin_epoch(0);
  CHECK(objective.kl_weight() == 0.0);
  objective.begin_epoch(5);
  CHECK(objective.kl_weight() == 0.5);
  objective.begin_epoch(25);
  CHECK(objective.kl_weight() == 1.0);

  Rng rng(2);
  Matrix x(400, 2);
  Vector y(400);
  for (Eigen::Index r = 0; r < 400; ++r) {
    y(r) = static_cast<double>(r % 2);
    x(r, 0) = (y(r) > 0 ? 3.0 : -3.0) + rng.normal();
    x(r, 1) = rng.normal();
  }
  nn::OptimizerConfig config;
  config.max_epochs = 15;
  config.patience = 14;
  config.batch_size = 32;
  config.cosine_schedule = false;
  EvidentialObjective fresh(10.0);
  Rng init(4);
  const nn::TrainResult result = nn::train_network(nn::Network(nn::Architecture{2, {16}, 2}, init), fresh,
                                                   nn::holdout_arrays(x, y, 0.2, 1), config);
  CHECK(result.history.back().val_loss < result.history.front().val_loss);
  const Vector v = vacuity(dirichlet_alpha(result.network.forward(x).logits));
  const Vector far = vacuity(dirichlet_alpha(result.network.forward(Matrix::Zero(1, 2)).logits));
  CHECK(v.mean() < far(0));
}

TEST_CASE("DUQ centroids and scores") {
  CentroidTracker tracker(2, 3, 0.99);
  Matrix batch(4, 3);
  batch << 1, 2, 3, 1, 2, 3, -1, 0, 1, -1, 0, 1;
  const Vector y = labels_vec({0, 0, 1, 1});
  for (int i = 0; i < 500; ++i) tracker.update(batch, y);
  const auto c = tracker.centroids();
  CHECK((c[0] - batch.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-3);
  CHECK((c[1] - batch.row(2).transpose()).cwiseAbs().maxCoeff() < 1e-3);

  // From a displaced state the error contracts by the decay per update.
  CentroidTracker moved(2, 3, 0.99);
  moved.update(batch.array() + 0.1, y);
  for (int i = 0; i < 500; ++i) moved.update(batch, y);
  const double err = (moved.centroids()[0] - batch.row(0).transpose()).cwiseAbs().maxCoeff();
  CHECK(err < 1e-3);
  CHECK(err == Approx(0.1 * std::pow(0.99, 500)).epsilon(1e-6));

  const Matrix k = rbf_activations(batch.topRows(1), c, 0.5);
  CHECK(k(0, 0) == Approx(1.0).epsilon(1e-5));
  CHECK(-k.row(0).maxCoeff() == Approx(-1.0).epsilon(1e-5));
  CHECK(rbf_activations(batch.topRows(1), {batch.row(0).transpose()}, 0.5)(0, 0) == 1.0);
}

TEST_CASE("DUQ objective gradient") {
  Rng rng(6);
  DuqObjective objective(2, 3, 1.5, 0.99);
  Matrix phi = random_matrix(6, 3, rng, 0.8);
  const Vector y = labels_vec({0, 1, 0, 1, 0, 1});
  objective.after_batch(random_matrix(6, 3, rng, 0.5), y);
  Matrix grad;
  objective.evaluate(phi, y, &grad);
  const Vector analytic = Eigen::Map<const Vector>(grad.data(), grad.size());
  CHECK(testing::max_fd_error(std::span<double>(phi.data(), static_cast<std::size_t>(phi.size())), analytic,
                              [&] { return objective.evaluate(phi, y, nullptr); }) < 1e-4);
}

TEST_CASE("conformal quantiles and sets") {
  // APS example.
  const std::vector<double> cal{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.0, 1.0, 1.0, 1.0};
  const double q = conformal_quantile(cal, 0.1);
  CHECK(q == 1.0);
  Matrix test(1, 2);
  test << 0.4, 0.6;
  CHECK(aps_set_sizes(test, q)(0) == 2.0);
  CHECK(aps_set_sizes(test, 0.7)(0) == 1.0);
  CHECK(aps_set_sizes(test, 0.5)(0) == 0.0);
  CHECK(aps_scores(test, {0})(0) == Approx(1.0));
  CHECK(aps_scores(test, {1})(0) == Approx(0.6));

  // Finite-sample rank: ceil((n + 1)(1 - alpha)).
  std::vector<double> ramp;
  for (int i = 1; i <= 19; ++i) ramp.push_back(i);
  CHECK(conformal_quantile(ramp, 0.1) == 18.0);
  CHECK(std::isinf(conformal_quantile({1.0, 2.0}, 0.1)));
  CHECK_THROWS_AS(conformal_quantile({}, 0.1), InvalidInput);

  Matrix p(2, 3);
  p << 0.7, 0.2, 0.1, 0.34, 0.33, 0.33;
  const Vector lac = lac_set_sizes(p, 0.75);  // classes with p >= 0.25
  CHECK(lac(0) == 1.0);
  CHECK(lac(1) == 3.0);
  CHECK(lac_scores(p, {1, 0})(0) == Approx(0.8));
  const Vector ent = entropy_set_sizes(p, 0.9);
  CHECK(ent(0) == 1.0);
  CHECK(ent(1) == 3.0);
}

TEST_CASE("conformal coverage on exchangeable data") {
  Rng rng(11);
  const auto draw = [&](Eigen::Index n, Matrix& probs, LabelList& labels) {
    probs.resize(n, 3);
    labels.clear();
    for (Eigen::Index r = 0; r < n; ++r) {
      Vector logits(3);
      for (int c = 0; c < 3; ++c) logits(c) = 1.5 * rng.normal();
      const Vector e = logits.array().exp();
      probs.row(r) = (e / e.sum()).transpose();
      const double u = rng.uniform();
      int y = 0;
      double cum = probs(r, 0);
      while (u > cum && y < 2) cum += probs(r, ++y);
      labels.push_back(y);
    }
  };
  Matrix cal_p, test_p;
  LabelList cal_y, test_y;
  draw(2000, cal_p, cal_y);
  draw(2000, test_p, test_y);

  const Vector lac = lac_scores(cal_p, cal_y);
  const double q_lac = conformal_quantile(std::vector<double>(lac.begin(), lac.end()), 0.1);
  const Vector aps = aps_scores(cal_p, cal_y);
  const double q_aps = conformal_quantile(std::vector<double>(aps.begin(), aps.end()), 0.1);
  int covered_lac = 0;
  int covered_aps = 0;
  for (Eigen::Index r = 0; r < 2000; ++r) {
    const int y = test_y[static_cast<std::size_t>(r)];
    covered_lac += test_p(r, y) >= 1.0 - q_lac;
    covered_aps += aps_scores(test_p.row(r), {y})(0) <= q_aps + 1e-12;
  }
  CHECK(covered_lac / 2000.0 >= 0.87);
  CHECK(covered_aps / 2000.0 >= 0.87);
  const Vector lac_sizes = lac_set_sizes(test_p, q_lac);
  CHECK(lac_sizes.minCoeff() >= 0.0);
  CHECK(lac_sizes.maxCoeff() <= 3.0);
  const Vector aps_sizes = aps_set_sizes(test_p, q_aps);
  CHECK(aps_sizes.minCoeff() >= 0.0);
  CHECK(aps_sizes.maxCoeff() <= 3.0);
}

TEST_CASE("logistic regression") {
  Rng rng(9);
  Matrix x = random_matrix(300, 3, rng);
  LabelList y;
  for (Eigen::Index r = 0; r < 300; ++r) y.push_back(x(r, 0) + 0.5 * rng.normal() > 0 ? 1 : 0);
  const LogisticRegression model = fit_logistic(x, y, 2);
  CHECK(model.gradient_norm < 1e-6);
  Matrix grad;
  logistic_objective(x, y, model.weights, 1.0, &grad);
  CHECK(grad.norm() < 1e-6);

  Matrix w = random_matrix(4, 2, rng, 0.3);
  logistic_objective(x, y, w, 1.0, &grad);
  const Vector analytic = Eigen::Map<const Vector>(grad.data(), grad.size());
  CHECK(testing::max_fd_error(std::span<double>(w.data(), static_cast<std::size_t>(w.size())), analytic,
                              [&] { return logistic_objective(x, y, w, 1.0, nullptr); }) < 1e-5);

  const Matrix p = model.predict_proba(x);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(model.weights(0, 1) - model.weights(0, 0) > 0.5);
}

TEST_CASE("every baseline fits and scores") {
  const data::LabeledDataset data = data::split(data::gen_synthetic(800, "regular", 5), 0.8, 5);
  const data::LabeledDataset test = data::gen_synthetic(150, "confounder", 6);
  for (BaselineKind kind : kAllBaselines) {
    CAPTURE(to_string(kind));
    const BaselineDetector det = fit_baseline(kind, data, 42, quick());
    const BaselineOutput a = det.score(test.features);
    const BaselineOutput b = det.score(test.features);
    CHECK(a.scores.size() == 150);
    CHECK(a.scores.allFinite());
    CHECK(a.scores == b.scores);
    CHECK(det.kind() == kind);
    if (a.probs) CHECK((a.probs->rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);

    const BaselineDetector loaded = BaselineDetector::from_json(det.to_json());
    CHECK(loaded.score(test.features).scores == a.scores);

    switch (kind) {
      case BaselineKind::kDeepEnsembles:
        CHECK(det.networks().size() == 5);
        [[fallthrough]];
      case BaselineKind::kMCDropout:
        CHECK(a.scores.maxCoeff() <= -0.5);
        CHECK(a.scores.minCoeff() >= -1.0);
        break;
      case BaselineKind::kConformal:
      case BaselineKind::kUTraCE:
      case BaselineKind::kCQRAPS:
        CHECK(det.conformal_threshold().has_value());
        CHECK(a.scores.minCoeff() >= 0.0);
        CHECK(a.scores.maxCoeff() <= 2.0);
        break;
      case BaselineKind::kUSD:
        CHECK(a.scores.minCoeff() >= 0.0);
        CHECK(a.scores.maxCoeff() <= 1.0);
        CHECK_FALSE(a.probs.has_value());
        break;
      case BaselineKind::kMahalanobis:
        CHECK(a.scores.minCoeff() >= 0.0);
        break;
      case BaselineKind::kDUQ:
        CHECK(det.centroids().size() == 2);
        CHECK(a.scores.minCoeff() >= -1.0);
        CHECK(a.scores.maxCoeff() <= 0.0);
        break;
      default:
        break;
    }
  }
  data::LabeledDataset with_test = data;
  with_test.split[3] = data::Split::kTest;
  CHECK_THROWS_AS(fit_baseline(BaselineKind::kODIN, with_test, 1, quick()), InvalidInput);
  const BaselineDetector det = fit_baseline(BaselineKind::kODIN, data, 1, quick());
  CHECK_THROWS_AS(det.score(Matrix::Zero(2, 3)), InvalidInput);
}
