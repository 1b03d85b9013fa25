#pragma once

#include "spectre/harness/config.hpp"
#include "spectre/harness/datasets.hpp"
#include "spectre/nn/serialize.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spectre::harness {

using nn::Json;

/// One detector on one anomaly set of one dataset and seed. The anomaly set
/// (label 1) is compared against the regular test set (label 0).
struct EvalRecord {
  std::string detector;
  std::string dataset;
  std::string variant;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr95 = 0.0;
  std::optional<double> conf_err;
};

Json to_json(const EvalRecord& r);
EvalRecord eval_record_from_json(const Json& j);

/// A (dataset, seed, detector) cell that could not be completed.
struct CellFailure {
  std::string detector;  // empty when the dataset itself failed to build
  std::string dataset;
  std::uint64_t seed = 0;
  std::string error;
};

Json to_json(const CellFailure& f);
CellFailure cell_failure_from_json(const Json& j);

/// Which data each step of a cell touched. `phase` is "fit" or "score";
/// `sets` lists split tags ("train", "val") or test-set names.
struct AccessEvent {
  std::string phase;
  std::string dataset;
  std::uint64_t seed = 0;
  std::string detector;
  std::vector<std::string> sets;
  std::vector<std::string> files;
};

Json to_json(const AccessEvent& e);

/// Scores and class probabilities of a fitted detector on one test set.
struct DetectorOutput {
  Vector scores;
  std::optional<Matrix> probs;
};

/// Fits `detector` on `data.fit` and scores every test set, appending to
/// `access` as it goes. Keyed by test-set name.
std::map<std::string, DetectorOutput> run_detector(const std::string& detector, const ExperimentData& data,
                                                   const ExperimentConfig& config, std::vector<AccessEvent>& access);

/// Metrics for every anomaly set against the regular set.
std::vector<EvalRecord> evaluate_outputs(const std::string& detector, const ExperimentData& data,
                                         const std::map<std::string, DetectorOutput>& outputs);

struct ExperimentResult {
  std::vector<EvalRecord> records;  // sorted by dataset, seed, detector, variant
  std::vector<CellFailure> failures;
  std::vector<AccessEvent> access;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs every (dataset, seed, detector) cell on a pool of `config.jobs`
/// workers. Failed cells are recorded and never abort the sweep.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct AblationRecord {
  std::string variant;
  std::string test_set;
  std::uint64_t seed = 0;
  double auroc = 0.0;
};

Json to_json(const AblationRecord& r);
AblationRecord ablation_record_from_json(const Json& j);

struct AblationResult {
  std::vector<AblationRecord> records;  // sorted by seed, variant order, test set
  std::vector<CellFailure> failures;    // detector field holds the variant
};

/// Evaluates the ablation variants on the synthetic family.
AblationResult run_ablation(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Signal selection and backbone change of an ablation variant.
detector::SignalSelection selection_for(AblationVariant v);
bool retrains_backbone(AblationVariant v);

/// Decisions and settings recorded next to every result set.
Json run_manifest(const ExperimentConfig& config);

}  // namespace spectre::harness
