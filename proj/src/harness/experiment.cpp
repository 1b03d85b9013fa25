#include "spectre/harness/experiment.hpp"

#include "spectre/metrics/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

namespace spectre::harness {

using signals::Signal;

Json to_json(const EvalRecord& r) {
  Json j{{"detector", r.detector}, {"dataset", r.dataset}, {"variant", r.variant}, {"seed", r.seed},
         {"auroc", r.auroc},       {"aupr", r.aupr},       {"fpr95", r.fpr95}};
  j["conf_err"] = r.conf_err ? Json(*r.conf_err) : Json(nullptr);
  return j;
}

EvalRecord eval_record_from_json(const Json& j) {
  EvalRecord r;
  r.detector = j.at("detector").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.auroc = j.at("auroc").get<double>();
  r.aupr = j.at("aupr").get<double>();
  r.fpr95 = j.at("fpr95").get<double>();
  if (j.contains("conf_err") && !j.at("conf_err").is_null()) r.conf_err = j.at("conf_err").get<double>();
  for (double v : {r.auroc, r.aupr, r.fpr95, r.conf_err.value_or(0.0)}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("record metric outside [0, 1]");
  }
  return r;
}

Json to_json(const CellFailure& f) {
  return {{"detector", f.detector}, {"dataset", f.dataset}, {"seed", f.seed}, {"error", f.error}};
}

CellFailure cell_failure_from_json(const Json& j) {
  return {j.at("detector").get<std::string>(), j.at("dataset").get<std::string>(), j.at("seed").get<std::uint64_t>(),
          j.at("error").get<std::string>()};
}

Json to_json(const AccessEvent& e) {
  return {{"phase", e.phase}, {"dataset", e.dataset}, {"seed", e.seed},
          {"detector", e.detector}, {"sets", e.sets}, {"files", e.files}};
}

Json to_json(const AblationRecord& r) {
  return {{"variant", r.variant}, {"test_set", r.test_set}, {"seed", r.seed}, {"auroc", r.auroc}};
}

AblationRecord ablation_record_from_json(const Json& j) {
  return {j.at("variant").get<std::string>(), j.at("test_set").get<std::string>(), j.at("seed").get<std::uint64_t>(),
          j.at("auroc").get<double>()};
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::vector<std::string> fit_sets(const data::LabeledDataset& fit) {
  std::vector<std::string> sets;
  for (auto s : {data::Split::kTrain, data::Split::kVal, data::Split::kTest}) {
    if (std::find(fit.split.begin(), fit.split.end(), s) != fit.split.end()) sets.push_back(data::to_string(s));
  }
  return sets;
}

}  // namespace

std::map<std::string, DetectorOutput> run_detector(const std::string& detector, const ExperimentData& data,
                                                   const ExperimentConfig& config, std::vector<AccessEvent>& access) {
  validate_detector(detector);
  const std::uint64_t seed = detector_seed(data.seed, detector, data.name());
  access.push_back({"fit", data.name(), data.seed, detector, fit_sets(data.fit), data.fit_sources});

  std::map<std::string, DetectorOutput> out;
  const auto log_score = [&](const std::string& name) {
    std::vector<std::string> files;
    if (auto it = data.test_sources.find(name); it != data.test_sources.end()) files.push_back(it->second);
    access.push_back({"score", data.name(), data.seed, detector, {name}, files});
  };
  if (detector == kSpectreName) {
    const detector::SpectreDetector det = detector::spectre_fit(data.fit, seed, config.spectre);
    for (const auto& [name, test] : data.tests) {
      log_score(name);
      out[name] = {det.score(test.features), det.class_probs(test.features)};
    }
    return out;
  }
  const auto kind = baselines::parse_baseline(detector);
  const baselines::BaselineDetector det = baselines::fit_baseline(kind, data.fit, seed, config.baseline);
  for (const auto& [name, test] : data.tests) {
    log_score(name);
    baselines::BaselineOutput o = det.score(test.features);
    out[name] = {std::move(o.scores), std::move(o.probs)};
  }
  return out;
}

std::vector<EvalRecord> evaluate_outputs(const std::string& detector, const ExperimentData& data,
                                         const std::map<std::string, DetectorOutput>& outputs) {
  const DetectorOutput& regular = outputs.at("regular");
  std::vector<EvalRecord> records;
  for (const auto& [name, output] : outputs) {
    if (name == "regular") continue;
    const metrics::PairedScores paired = metrics::pair_scores(regular.scores, output.scores);
    EvalRecord r;
    r.detector = detector;
    r.dataset = data.name();
    r.variant = name;
    r.seed = data.seed;
    r.auroc = metrics::auroc(paired.scores, paired.labels);
    r.aupr = metrics::aupr(paired.scores, paired.labels);
    r.fpr95 = metrics::fpr95(paired.scores, paired.labels);
    if (output.probs) r.conf_err = metrics::conf_err(*output.probs, data.tests.at(name).labels);
    records.push_back(std::move(r));
  }
  return records;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  struct Task {
    std::size_t data_index;
    std::string detector;
  };
  struct Slot {
    std::vector<EvalRecord> records;
    std::vector<AccessEvent> access;
    std::optional<CellFailure> failure;
  };

  // Datasets first, one per (family, seed); detectors then share them read-only.
  std::vector<std::pair<data::Family, std::uint64_t>> keys;
  for (auto family : config.datasets) {
    for (auto seed : config.seeds) keys.emplace_back(family, seed);
  }
  std::vector<std::optional<ExperimentData>> datasets(keys.size());
  std::vector<std::optional<CellFailure>> data_failures(keys.size());
  parallel_for(keys.size(), config.jobs, [&](std::size_t i) {
    try {
      datasets[i] = build_data(config, keys[i].first, keys[i].second);
    } catch (const std::exception& e) {
      data_failures[i] = CellFailure{"", data::to_string(keys[i].first), keys[i].second, e.what()};
    }
  });

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!datasets[i]) continue;
    for (const auto& d : config.detectors) tasks.push_back({i, d});
  }
  std::vector<Slot> slots(tasks.size());
  std::mutex progress_mutex;
  parallel_for(tasks.size(), config.jobs, [&](std::size_t t) {
    const ExperimentData& data = *datasets[tasks[t].data_index];
    Slot& slot = slots[t];
    try {
      slot.records = evaluate_outputs(tasks[t].detector, data, run_detector(tasks[t].detector, data, config, slot.access));
    } catch (const std::exception& e) {
      slot.records.clear();
      slot.failure = CellFailure{tasks[t].detector, data.name(), data.seed, e.what()};
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(data.name() + " seed " + std::to_string(data.seed) + " " + tasks[t].detector +
               (slot.failure ? " FAILED: " + slot.failure->error : " done"));
    }
  });

  ExperimentResult result;
  for (auto& f : data_failures) {
    if (f) result.failures.push_back(*f);
  }
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.records.begin(), slot.records.end());
    result.access.insert(result.access.end(), slot.access.begin(), slot.access.end());
    if (slot.failure) result.failures.push_back(*slot.failure);
  }
  std::stable_sort(result.records.begin(), result.records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return std::tie(a.dataset, a.seed, a.detector, a.variant) < std::tie(b.dataset, b.seed, b.detector, b.variant);
  });
  return result;
}

detector::SignalSelection selection_for(AblationVariant v) {
  detector::SignalSelection s;
  switch (v) {
    case AblationVariant::kFull:
    case AblationVariant::kNoGaussLoss: break;
    case AblationVariant::kMinusGauss: s.exclude = {Signal::kGauss}; break;
    case AblationVariant::kMinusFtMahaP: s.exclude = {Signal::kFtMahaP}; break;
    case AblationVariant::kMinusInMaha: s.exclude = {Signal::kInMaha}; break;
    case AblationVariant::kMinusODIN: s.exclude = {Signal::kODIN}; break;
    case AblationVariant::kMinusUSD: s.exclude = {Signal::kUSD}; break;
    case AblationVariant::kMinusMI: s.exclude = {Signal::kMI}; break;
    case AblationVariant::kMinusEnergy: s.exclude = {Signal::kEnergy}; break;
    case AblationVariant::kMinusEntropy: s.exclude = {Signal::kEntropy}; break;
    case AblationVariant::kSingleModelK1: s.force_k = 1; break;
    case AblationVariant::kGaussOnly: s.only = Signal::kGauss; break;
    case AblationVariant::kInMahaOnly: s.only = Signal::kInMaha; break;
    case AblationVariant::kOdinOnly: s.only = Signal::kODIN; break;
  }
  return s;
}

bool retrains_backbone(AblationVariant v) { return v == AblationVariant::kNoGaussLoss; }

AblationResult run_ablation(const ExperimentConfig& config, const ProgressFn& progress) {
  ExperimentConfig c = config;
  c.datasets = {data::Family::kSynthetic};
  c.validate();

  // One backbone fit per (seed, lambda setting); variants recalibrate from it.
  struct Task {
    std::uint64_t seed;
    bool no_gauss;
  };
  std::vector<Task> tasks;
  const bool any_standard = std::any_of(c.ablation_variants.begin(), c.ablation_variants.end(),
                                        [](AblationVariant v) { return !retrains_backbone(v); });
  const bool any_nogauss = std::any_of(c.ablation_variants.begin(), c.ablation_variants.end(), retrains_backbone);
  for (auto seed : c.seeds) {
    if (any_standard) tasks.push_back({seed, false});
    if (any_nogauss) tasks.push_back({seed, true});
  }
  struct Slot {
    std::vector<AblationRecord> records;
    std::vector<CellFailure> failures;
  };
  std::vector<Slot> slots(tasks.size());
  std::mutex progress_mutex;
  parallel_for(tasks.size(), c.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    Slot& slot = slots[t];
    std::vector<AblationVariant> variants;
    for (auto v : c.ablation_variants) {
      if (retrains_backbone(v) == task.no_gauss) variants.push_back(v);
    }
    try {
      const ExperimentData data = build_data(c, data::Family::kSynthetic, task.seed);
      detector::SpectreOptions options = c.spectre;
      if (task.no_gauss) options.gauss_lambda = 0.0;
      const detector::FittedSignals fitted =
          detector::fit_signals(data.fit, detector_seed(task.seed, kSpectreName, data.name()), options);
      const detector::SpectreDetector base(fitted.standardizer, fitted.models, {});
      std::map<std::string, signals::SignalBundle> bundles;
      for (const auto& [name, test] : data.tests) bundles[name] = base.raw_signals(test.features);

      for (auto v : variants) {
        try {
          const detector::CalibrationState state = detector::calibrate_selection(fitted, selection_for(v));
          const Vector regular = detector::fuse(state, bundles.at("regular"));
          for (const auto& [name, bundle] : bundles) {
            if (name == "regular") continue;
            const auto paired = metrics::pair_scores(regular, detector::fuse(state, bundle));
            slot.records.push_back({to_string(v), name, task.seed, metrics::auroc(paired.scores, paired.labels)});
          }
        } catch (const std::exception& e) {
          slot.failures.push_back({to_string(v), "synthetic", task.seed, e.what()});
        }
      }
    } catch (const std::exception& e) {
      for (auto v : variants) slot.failures.push_back({to_string(v), "synthetic", task.seed, e.what()});
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("ablation seed " + std::to_string(task.seed) + (task.no_gauss ? " (no Gauss loss)" : "") + " done");
    }
  });

  AblationResult result;
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.records.begin(), slot.records.end());
    result.failures.insert(result.failures.end(), slot.failures.begin(), slot.failures.end());
  }
  const auto order = [](const std::string& name) {
    return static_cast<std::size_t>(parse_ablation_variant(name));
  };
  std::stable_sort(result.records.begin(), result.records.end(), [&](const AblationRecord& a, const AblationRecord& b) {
    return std::make_tuple(a.seed, order(a.variant), a.test_set) < std::make_tuple(b.seed, order(b.variant), b.test_set);
  });
  return result;
}

Json run_manifest(const ExperimentConfig& config) {
  Json datasets = Json::array();
  for (auto f : config.datasets) {
    datasets.push_back({{"name", data::to_string(f)}, {"variants", config.anomaly_variants(f)}});
  }
  Json seeds = Json::object();
  for (auto f : config.datasets) {
    for (const auto& d : config.detectors) {
      for (auto s : config.seeds) {
        seeds[data::to_string(f)][d][std::to_string(s)] = detector_seed(s, d, data::to_string(f));
      }
    }
  }
  Json ablation = Json::array();
  for (auto v : config.ablation_variants) ablation.push_back(to_string(v));
  return {
      {"format", "spectre.run/1"},
      {"noise_convention", data::to_string(config.noise)},
      {"score_orientation", "higher is more anomalous"},
      {"positive_class", "anomaly (label 1); regular test set is label 0"},
      {"evaluation_pairing", "each anomaly set against the regular test set of the same dataset and seed"},
      {"ablation_overall_mean", "unweighted mean of the anomaly-set AUROCs; the regular set is the reference, not averaged"},
      {"seed_derivation",
       "detector seed = derive(derive(seed, detector), dataset); derive(s, tag) = mix64(mix64(s) xor fnv1a(tag)); mix64 = splitmix64 finalizer"},
      {"datasets", datasets},
      {"detectors", config.detectors},
      {"seeds", config.seeds},
      {"detector_seeds", seeds},
      {"ablation_variants", ablation},
      {"sizes",
       {{"synthetic_train", config.sizes.synthetic_train},
        {"synthetic_test", config.sizes.synthetic_test},
        {"gridworld_train", config.sizes.gridworld_train},
        {"gridworld_test", config.sizes.gridworld_test},
        {"adult_test", config.sizes.adult_test}}},
      {"spectre",
       {{"epochs", config.spectre.backbone.max_epochs},
        {"patience", config.spectre.backbone.patience},
        {"pseudo_ood", config.spectre.pseudo_ood},
        {"causal", config.spectre.use_causal},
        {"usd_epochs", config.spectre.usd.epochs},
        {"causal_epochs", config.spectre.causal.max_epochs}}},
      {"baseline",
       {{"epochs", config.baseline.optimizer.max_epochs},
        {"patience", config.baseline.optimizer.patience},
        {"mc_passes", config.baseline.mc_passes}}},
  };
}

}  // namespace spectre::harness
