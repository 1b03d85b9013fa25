// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
// Usage: acceptance [--out DIR] [--jobs N] [--only PREFIX]
#include "../support/metric_oracles.hpp"
#include "../unit/fd.hpp"

#include "spectre/baselines/objectives.hpp"
#include "spectre/data/adult.hpp"
#include "spectre/data/table_io.hpp"
#include "spectre/harness/experiment.hpp"
#include "spectre/harness/report.hpp"
#include "spectre/metrics/metrics.hpp"
#include "spectre/nn/losses.hpp"
#include "spectre/signals/mahalanobis.hpp"
#include "spectre/signals/signals.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

using namespace spectre;
using namespace spectre::harness;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;
std::ostringstream g_log;

void report(bool ok, const std::string& name, const std::string& detail) {
  const std::string line = std::string(ok ? "[PASS] " : "[FAIL] ") + name + " :: " + detail;
  std::cout << line << std::endl;
  g_log << line << "\n";
  if (!ok) ++g_failed;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double mean_of(const std::vector<EvalRecord>& records, const std::string& detector, const std::string& dataset,
               const std::string& variant, double EvalRecord::*field) {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.detector == detector && r.dataset == dataset && r.variant == variant) v.push_back(r.*field);
  }
  if (v.empty()) return std::nan("");
  return metrics::mean_std(v).mean;
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

void progress(const std::string& line) { std::cerr << "  .. " << line << std::endl; }

// ---- fast suites -----------------------------------------------------------

void metric_oracle_suite() {
  Rng rng(20240601);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [s, y] = testing::random_instance(rng);
    if (std::abs(metrics::auroc(s, y) - testing::brute_auroc(s, y)) > 1e-12) ++mismatches;
    if (std::abs(metrics::aupr(s, y) - testing::brute_aupr(s, y)) > 1e-12) ++mismatches;
    if (metrics::fpr95(s, y) != testing::brute_fpr95(s, y)) ++mismatches;
  }
  report(mismatches == 0, "metric oracle suite",
         "auroc/aupr/fpr95 vs brute force on 1000 random instances (n <= 200): " + std::to_string(mismatches) +
             " mismatches");
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

enum class Loss { kCe, kCeGauss, kEvidential };

double loss_value(const nn::Network& net, const Matrix& x, const Vector& y, Loss loss) {
  const auto out = net.forward(x, nn::Mode::kTraining, nullptr);
  if (loss == Loss::kEvidential) return baselines::evidential_loss(out.logits, y, 0.5);
  double v = nn::cross_entropy(out.logits, y);
  if (loss == Loss::kCeGauss) v += 2.0 * nn::gauss_reg_loss(out.features);
  return v;
}

double gradient_error(Loss loss, std::uint64_t seed) {
  Rng rng(seed);
  const nn::Architecture arch{5, {6, 4}, 3, 0.0, loss == Loss::kCeGauss, loss == Loss::kCeGauss};
  nn::Network net(arch, rng);
  const Matrix x = random_matrix(4, 5, rng);
  Vector y(4);
  y << 0, 1, 2, 1;
  nn::ForwardCache cache;
  const auto out = net.forward(x, nn::Mode::kTraining, nullptr, &cache);
  Matrix d_logits;
  Matrix d_features;
  if (loss == Loss::kEvidential) {
    baselines::evidential_loss(out.logits, y, 0.5, &d_logits);
  } else {
    nn::cross_entropy(out.logits, y, &d_logits);
  }
  if (loss == Loss::kCeGauss) {
    nn::gauss_reg_loss(out.features, &d_features);
    d_features *= 2.0;
  }
  const Vector analytic =
      net.backward(cache, d_logits, loss == Loss::kCeGauss ? &d_features : nullptr, nullptr).flatten();
  double worst = 0.0;
  Eigen::Index offset = 0;
  for (auto span : net.parameters()) {
    const Vector slice = analytic.segment(offset, static_cast<Eigen::Index>(span.size()));
    worst = std::max(worst, testing::max_fd_error(span, slice, [&] { return loss_value(net, x, y, loss); }));
    offset += static_cast<Eigen::Index>(span.size());
  }
  return worst;
}

void gradient_suite() {
  double worst = 0.0;
  std::string detail;
  for (auto [loss, name] : {std::pair{Loss::kCe, "CE"}, {Loss::kCeGauss, "CE+Gauss"}, {Loss::kEvidential, "evidential"}}) {
    double w = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) w = std::max(w, gradient_error(loss, seed));
    worst = std::max(worst, w);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s %.2e; ", name, w);
    detail += buf;
  }
  report(worst < 1e-4, "gradient suite", detail + "max relative FD error < 1e-4 over 5 random nets each");
}

void signal_suite() {
  std::vector<std::pair<std::string, bool>> checks;
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  const double ln2pi = std::log(2.0 * std::numbers::pi);
  checks.emplace_back("gauss h=0", close(signals::gauss_score({Vector::Zero(2)}), -ln2pi));
  checks.emplace_back("gauss h=(1,1)", close(signals::gauss_score({Vector::Ones(2)}), -ln2pi - 1.0));
  {
    const Vector a = Vector::Constant(2, 0.3);
    const Vector b = Vector::Constant(2, -1.2);
    checks.emplace_back("gauss mean of members",
                        close(signals::gauss_score({a, b}), 0.5 * (signals::gauss_score({a}) + signals::gauss_score({b}))));
  }
  Matrix l(2, 2);
  l << 0, 0, 1, 0;
  const Vector e = signals::energy_scores(l);
  checks.emplace_back("energy (0,0)", close(e(0), -std::log(2.0)));
  checks.emplace_back("energy (1,0)", close(e(1), -std::log(std::exp(1.0) + 1.0)));
  {
    Matrix a(1, 2), b(1, 2);
    a << 60, -60;
    b << -60, 60;
    const auto split = signals::entropy_and_mi({a, b});
    checks.emplace_back("entropy of disagreeing one-hots", close(split.entropy(0), std::log(2.0)));
    checks.emplace_back("MI of disagreeing one-hots", close(split.mi(0), std::log(2.0)));
    const auto same = signals::entropy_and_mi({a, a});
    checks.emplace_back("MI of identical members", close(same.mi(0), 0.0));
    const auto uniform = signals::entropy_and_mi({Matrix::Zero(1, 2)});
    checks.emplace_back("entropy of uniform", close(uniform.entropy(0), std::log(2.0)));
  }
  {
    Matrix alpha(1, 2);
    alpha << 5, 1;
    checks.emplace_back("vacuity alpha=(5,1)", close(baselines::vacuity(alpha)(0), 1.0 / 3.0));
  }
  {
    const double r = std::sqrt(0.5);
    Matrix x(4, 1);
    x << -1 - r, -1 + r, 1 - r, 1 + r;
    const auto m = signals::fit_mahalanobis(x, {0, 0, 1, 1}, signals::FeatureSpace::kInput);
    Matrix q(2, 1);
    q << 0, 1;
    const Vector s = m.scores(q);
    checks.emplace_back("mahalanobis 1-D x=0", close(s(0), -1.0));
    checks.emplace_back("mahalanobis at class mean", close(s(1), 0.0));
  }
  std::string failed;
  for (const auto& [name, ok] : checks) {
    if (!ok) failed += name + "; ";
  }
  report(failed.empty(), "signal analytic suite",
         std::to_string(checks.size()) + " examples to 1e-9" + (failed.empty() ? "" : ", failed: " + failed));
}

// ---- experiment-scale criteria -----------------------------------------------

void synthetic_criteria(const fs::path& out, std::size_t jobs) {
  ExperimentConfig c = parse_config("datasets = synthetic\n");
  c.jobs = jobs;

  // Runtime of one full synthetic SPECTRE-G2 fit + score.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentData data = build_data(c, data::Family::kSynthetic, 42);
    std::vector<AccessEvent> access;
    run_detector(kSpectreName, data, c, access);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(secs <= 900.0, "synthetic runtime budget",
           "SPECTRE-G2 fit+score for one seed took " + num(secs) + " s on " +
               std::to_string(std::thread::hardware_concurrency()) + " core(s) (budget 900 s)");
  }

  std::cerr << "synthetic experiment, run 1" << std::endl;
  const ExperimentResult first = run_experiment(c, progress);
  write_experiment(out / "synthetic_run1", first, run_manifest(c));
  std::cerr << "synthetic experiment, run 2" << std::endl;
  const ExperimentResult second = run_experiment(c, progress);
  write_experiment(out / "synthetic_run2", second, run_manifest(c));

  const auto& R = first.records;
  report(first.failures.empty() && R.size() == 13 * 4 * 5, "synthetic record count",
         std::to_string(R.size()) + " records (13 detectors x 4 anomaly sets x 5 seeds = 260), " +
             std::to_string(first.failures.size()) + " failed cells");

  const double sp_conf = mean_of(R, kSpectreName, "synthetic", "confounder", &EvalRecord::auroc);
  report(in_range(sp_conf, 0.70, 0.80), "synthetic confounder SPECTRE-G2", "mean AUROC " + num(sp_conf) + " in [0.70, 0.80]");

  const double sp_mech = mean_of(R, kSpectreName, "synthetic", "mechanism", &EvalRecord::auroc);
  const double ma_mech = mean_of(R, "Mahalanobis", "synthetic", "mechanism", &EvalRecord::auroc);
  report(in_range(sp_mech, 0.62, 0.73), "synthetic mechanism SPECTRE-G2", "mean AUROC " + num(sp_mech) + " in [0.62, 0.73]");
  report(in_range(ma_mech, 0.63, 0.74), "synthetic mechanism Mahalanobis", "mean AUROC " + num(ma_mech) + " in [0.63, 0.74]");
  report(ma_mech >= sp_mech - 0.03, "synthetic mechanism Mahalanobis vs SPECTRE-G2",
         num(ma_mech) + " >= " + num(sp_mech) + " - 0.03");

  const double ma_conf = mean_of(R, "Mahalanobis", "synthetic", "confounder", &EvalRecord::auroc);
  const double de_conf = mean_of(R, "DeepEnsembles", "synthetic", "confounder", &EvalRecord::auroc);
  report(in_range(ma_conf, 0.68, 0.79), "synthetic confounder Mahalanobis", "mean AUROC " + num(ma_conf) + " in [0.68, 0.79]");
  report(de_conf < 0.45, "synthetic confounder DeepEnsembles", "mean AUROC " + num(de_conf) + " < 0.45");

  const bool same = read_text(out / "synthetic_run1" / "records.jsonl") == read_text(out / "synthetic_run2" / "records.jsonl");
  report(same, "determinism", "two full synthetic runs give bit-identical records.jsonl");

  bool audit = true;
  for (const auto& e : first.access) {
    if (e.phase == "fit" && e.sets != std::vector<std::string>{"train", "val"}) audit = false;
  }
  report(audit, "test-set access audit", "every fit touched only train/val rows");
}

void gridworld_criteria(const fs::path& out, std::size_t jobs) {
  ExperimentConfig c = parse_config("datasets = gridworld\ndetectors = SPECTRE-G2\n");
  c.jobs = jobs;
  std::cerr << "gridworld experiment" << std::endl;
  const ExperimentResult result = run_experiment(c, progress);
  write_experiment(out / "gridworld", result, run_manifest(c));
  const double newobj = mean_of(result.records, kSpectreName, "gridworld", "newobj", &EvalRecord::auroc);
  const double newobj_fpr = mean_of(result.records, kSpectreName, "gridworld", "newobj", &EvalRecord::fpr95);
  const double mech = mean_of(result.records, kSpectreName, "gridworld", "mechanism", &EvalRecord::auroc);
  report(newobj >= 0.93, "gridworld newobj SPECTRE-G2 AUROC", "mean AUROC " + num(newobj) + " >= 0.93");
  report(newobj_fpr <= 0.15, "gridworld newobj SPECTRE-G2 FPR95", "mean FPR95 " + num(newobj_fpr) + " <= 0.15");
  report(in_range(mech, 0.78, 0.90), "gridworld mechanism SPECTRE-G2", "mean AUROC " + num(mech) + " in [0.78, 0.90]");
}

void ablation_criteria(const fs::path& out, std::size_t jobs) {
  ExperimentConfig c = parse_config("");
  c.jobs = jobs;
  std::cerr << "ablation" << std::endl;
  const AblationResult result = run_ablation(c, progress);
  write_ablation(out / "ablation", result, run_manifest(c));
  const auto means = ablation_overall_means(result.records);
  report(result.failures.empty() && means.size() == 14, "ablation table",
         std::to_string(means.size()) + " variants, " + std::to_string(result.failures.size()) + " failures");
  const double full = means.count("Full") ? means.at("Full") : std::nan("");
  for (const char* v : {"GaussOnly", "InMahaOnly", "OdinOnly"}) {
    const double m = means.count(v) ? means.at(v) : std::nan("");
    report(full >= m + 0.01, std::string("ablation Full vs ") + v, "Full " + num(full) + " >= " + num(m) + " + 0.01");
  }
  for (const char* v : {"MinusGauss", "MinusFtMahaP", "MinusInMaha", "MinusODIN", "MinusUSD", "MinusMI", "MinusEnergy",
                        "MinusEntropy"}) {
    const double m = means.count(v) ? means.at(v) : std::nan("");
    report(std::abs(full - m) <= 0.02, std::string("ablation ") + v + " near Full",
           "|" + num(full) + " - " + num(m) + "| <= 0.02");
  }
}

void adult_criteria(const fs::path& out, std::size_t jobs) {
  const fs::path dir = out / "adult";
  fs::create_directories(dir);
  data::write_adult_fixture(dir / "adult_fixture.csv", 6000, 7);
  ExperimentConfig c = parse_config("datasets = adult\nseeds = 42\nadult.csv = adult_fixture.csv\n", dir);
  c.out = dir;
  c.jobs = jobs;
  std::cerr << "adult fixture" << std::endl;
  const ExperimentResult result = run_experiment(c, progress);
  write_experiment(dir, result, run_manifest(c));
  bool finite = true;
  for (const auto& r : result.records) {
    for (double v : {r.auroc, r.aupr, r.fpr95}) finite = finite && std::isfinite(v);
    if (r.conf_err) finite = finite && std::isfinite(*r.conf_err);
  }
  report(result.failures.empty() && finite && result.records.size() == 13 * 3, "adult fixture end to end",
         std::to_string(result.records.size()) + " records from 13 detectors x 3 anomaly sets, " +
             std::to_string(result.failures.size()) + " failures, all metrics finite: " + (finite ? "yes" : "no"));
}

// Gaussian class clusters in 512 dimensions; the anomaly set shifts the mean.
data::LabeledDataset planted_table(std::size_t n, std::uint64_t seed, double shift, const Matrix& class_means) {
  Rng rng(seed);
  const Eigen::Index d = class_means.cols();
  data::LabeledDataset t;
  t.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(rng.index(static_cast<std::size_t>(class_means.rows())));
    t.labels.push_back(y);
    for (Eigen::Index j = 0; j < d; ++j) {
      t.features(static_cast<Eigen::Index>(i), j) = class_means(y, j) + rng.normal() + (j < 128 ? shift : 0.0);
    }
  }
  t.split.assign(n, data::Split::kTest);
  for (Eigen::Index j = 0; j < d; ++j) t.meta.columns.push_back("f" + std::to_string(j));
  return t;
}

void planted_criteria(const fs::path& out, std::size_t jobs) {
  const fs::path dir = out / "planted512";
  fs::create_directories(dir);
  Rng rng(512);
  Matrix means(10, 512);
  for (Eigen::Index r = 0; r < 10; ++r) {
    for (Eigen::Index c = 0; c < 512; ++c) means(r, c) = 0.5 * rng.normal();
  }
  data::write_feature_table(dir / "train.bin", planted_table(5000, 1, 0.0, means), data::TableFormat::kRawFloat);
  data::write_feature_table(dir / "regular.bin", planted_table(1000, 2, 0.0, means), data::TableFormat::kRawFloat);
  data::write_feature_table(dir / "shift.bin", planted_table(1000, 3, 1.0, means), data::TableFormat::kRawFloat);
  ExperimentConfig c = parse_config(
      "datasets = features\ndetectors = SPECTRE-G2\nfeatures.train = train.bin\nfeatures.test.regular = regular.bin\n"
      "features.test.shift = shift.bin\n",
      dir);
  c.out = dir;
  c.jobs = jobs;
  std::cerr << "planted 512-dim mean shift" << std::endl;
  const ExperimentResult result = run_experiment(c, progress);
  write_experiment(dir, result, run_manifest(c));
  double worst = 1.0;
  for (const auto& r : result.records) worst = std::min(worst, r.auroc);
  report(result.failures.empty() && result.records.size() == 5 && worst >= 0.95, "planted 512-dim mean shift",
         "SPECTRE-G2 AUROC over 5 seeds: min " + num(worst) + ", mean " +
             num(mean_of(result.records, kSpectreName, "features", "shift", &EvalRecord::auroc)) + " (>= 0.95 each)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_out";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string only;
  app.add_option("--out", out, "Artifact directory");
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--only", only, "Run only stages whose name starts with this (fast, synthetic, gridworld, ablation, adult, planted)");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(out);
  fs::create_directories(dir);
  const auto run = [&](const std::string& stage, const std::function<void()>& fn) {
    if (!only.empty() && stage.rfind(only, 0) != 0) return;
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, "stage " + stage, std::string("aborted: ") + e.what());
    }
  };
  run("fast", [] {
    metric_oracle_suite();
    gradient_suite();
    signal_suite();
  });
  run("synthetic", [&] { synthetic_criteria(dir, jobs); });
  run("gridworld", [&] { gridworld_criteria(dir, jobs); });
  run("ablation", [&] { ablation_criteria(dir, jobs); });
  run("adult", [&] { adult_criteria(dir, jobs); });
  run("planted", [&] { planted_criteria(dir, jobs); });

  write_text(dir / "acceptance_report.txt", g_log.str());
  std::cout << (g_failed == 0 ? "ALL CRITERIA PASSED" : std::to_string(g_failed) + " CRITERIA FAILED") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
