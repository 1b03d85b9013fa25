// Command-line front end: dataset generation, single-detector fit/score, and
// the configuration-driven experiment, ablation and report runs.
#include "spectre/baselines/baselines.hpp"
#include "spectre/common/rng.hpp"
#include "spectre/data/adult.hpp"
#include "spectre/data/generators.hpp"
#include "spectre/data/preprocess.hpp"
#include "spectre/data/table_io.hpp"
#include "spectre/detector/persist.hpp"
#include "spectre/harness/config.hpp"
#include "spectre/harness/datasets.hpp"
#include "spectre/harness/experiment.hpp"
#include "spectre/harness/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace spectre;
using harness::Json;

namespace {

constexpr int kPartialFailure = 2;

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
  std::vector<std::string> datasets;
  std::vector<std::string> variants;
  std::vector<std::string> detectors;
  std::size_t jobs = 0;
};

harness::ExperimentConfig resolve_config(const Common& o) {
  harness::ExperimentConfig c = o.config.empty() ? harness::parse_config("") : harness::load_config(o.config);
  if (!o.seeds.empty()) c.seeds = harness::parse_seed_list(o.seeds);
  if (!o.out.empty()) c.out = o.out;
  if (!o.datasets.empty()) {
    c.datasets.clear();
    for (const auto& d : o.datasets) c.datasets.push_back(data::parse_family(d));
  }
  if (!o.variants.empty()) {
    for (auto f : c.datasets) c.variants[f] = o.variants;
  }
  if (!o.detectors.empty()) c.detectors = o.detectors;
  if (o.jobs > 0) c.jobs = o.jobs;
  c.validate();
  return c;
}

void progress(const std::string& line) { std::cerr << line << std::endl; }

std::uint64_t single_seed(const std::string& text) {
  const auto seeds = harness::parse_seed_list(text.empty() ? "42" : text);
  if (seeds.size() != 1) throw InvalidInput("this command takes a single seed");
  return seeds.front();
}

int cmd_generate(const Common& o, std::size_t size, const std::string& noise, const std::string& input,
                 std::optional<double> threshold, bool tag_split) {
  if (o.datasets.size() != 1) throw InvalidInput("generate: pass exactly one --dataset");
  if (o.out.empty()) throw InvalidInput("generate: --out is required");
  const data::Family family = data::parse_family(o.datasets.front());
  const std::string variant = o.variants.empty() ? "regular" : o.variants.front();
  data::validate_variant(family, variant);
  const std::uint64_t seed = single_seed(o.seeds);

  data::LabeledDataset ds;
  data::SyntheticOptions sopts;
  sopts.noise = data::parse_noise_convention(noise);
  sopts.label_threshold = threshold;
  switch (family) {
    case data::Family::kSynthetic: ds = data::gen_synthetic(size ? size : 10000, variant, seed, sopts); break;
    case data::Family::kGridworld: ds = data::gen_gridworld(size ? size : 5000, variant, seed); break;
    case data::Family::kAdult:
      if (input.empty()) throw InvalidInput("generate: adult needs --input <census csv>");
      ds = data::inject_adult_anomaly(data::load_adult_csv(input), variant, seed);
      break;
    case data::Family::kFeatures: throw InvalidInput("generate: feature tables are supplied, not generated");
  }
  if (tag_split) ds = data::split(std::move(ds), 0.8, seed);
  const std::filesystem::path out(o.out);
  data::write_feature_table(out, ds, data::format_from_path(out));
  Json manifest{{"dataset", data::to_string(family)}, {"variant", variant},           {"seed", seed},
                {"rows", ds.rows()},                  {"cols", ds.cols()},            {"columns", ds.meta.columns},
                {"noise_convention", noise},          {"split", tag_split ? "train/val 80/20" : "test"}};
  if (family == data::Family::kSynthetic) manifest["label_threshold"] = threshold ? Json(*threshold) : Json("own median");
  harness::write_text(out.string() + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << ds.rows() << " rows to " << out.string() << "\n";
  return 0;
}

data::LabeledDataset training_data(const Common& o, const harness::ExperimentConfig& c, std::uint64_t seed) {
  if (o.datasets.size() != 1) throw InvalidInput("fit: pass exactly one --dataset (family name or table path)");
  const std::string& d = o.datasets.front();
  if (!std::filesystem::exists(d)) {
    harness::ExperimentConfig cc = c;
    cc.datasets = {data::parse_family(d)};
    return harness::build_data(cc, cc.datasets.front(), seed).fit;
  }
  data::LabeledDataset table = data::load_feature_table(d);
  IndexList rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.split[r] != data::Split::kTest) rows.push_back(r);
  }
  return rows.empty() ? data::split(std::move(table), 0.8, seed) : table.subset(rows);
}

int cmd_fit(const Common& o) {
  if (o.detectors.size() != 1) throw InvalidInput("fit: pass exactly one --detector");
  if (o.out.empty()) throw InvalidInput("fit: --out is required");
  Common base = o;
  base.out.clear();
  base.datasets.clear();
  base.detectors.clear();
  base.variants.clear();
  const harness::ExperimentConfig c = resolve_config(base);
  const std::uint64_t seed = single_seed(o.seeds);
  const std::string& name = o.detectors.front();
  harness::validate_detector(name);
  const data::LabeledDataset fit = training_data(o, c, seed);
  const std::string dataset_name = std::filesystem::exists(o.datasets.front())
                                       ? std::filesystem::path(o.datasets.front()).stem().string()
                                       : o.datasets.front();
  const std::uint64_t dseed = harness::detector_seed(seed, name, dataset_name);
  const Json manifest{{"detector", name}, {"dataset", o.datasets.front()}, {"seed", seed}, {"detector_seed", dseed},
                      {"train_rows", fit.rows_in(data::Split::kTrain).size()},
                      {"val_rows", fit.rows_in(data::Split::kVal).size()},
                      {"score_orientation", "higher is more anomalous"}};
  if (name == harness::kSpectreName) {
    detector::save_detector(o.out, detector::spectre_fit(fit, dseed, c.spectre), manifest);
  } else {
    Json doc = baselines::fit_baseline(baselines::parse_baseline(name), fit, dseed, c.baseline).to_json();
    doc["manifest"] = manifest;
    nn::write_cbor(o.out, doc);
  }
  std::cout << "saved " << name << " to " << o.out << "\n";
  return 0;
}

int cmd_score(const Common& o) {
  if (o.detectors.size() != 1) throw InvalidInput("score: --detector <model file> is required");
  if (o.datasets.size() != 1) throw InvalidInput("score: --dataset <table> is required");
  if (o.out.empty()) throw InvalidInput("score: --out is required");
  const Json doc = nn::read_cbor(o.detectors.front());
  const data::LabeledDataset table = data::load_feature_table(o.datasets.front());
  Vector scores;
  std::optional<Matrix> probs;
  if (doc.value("format", "") == "spectre.detector/1") {
    const auto det = detector::detector_from_json(doc);
    scores = det.score(table.features);
    probs = det.class_probs(table.features);
  } else {
    auto out = baselines::BaselineDetector::from_json(doc).score(table.features);
    scores = std::move(out.scores);
    probs = std::move(out.probs);
  }
  std::ostringstream csv;
  csv << "score";
  if (probs) {
    for (Eigen::Index c = 0; c < probs->cols(); ++c) csv << ",p" << c;
  }
  csv << "\n";
  for (Eigen::Index r = 0; r < scores.size(); ++r) {
    csv << data::format_double(scores(r));
    if (probs) {
      for (Eigen::Index c = 0; c < probs->cols(); ++c) csv << ',' << data::format_double((*probs)(r, c));
    }
    csv << "\n";
  }
  harness::write_text(o.out, csv.str());
  std::cout << "scored " << scores.size() << " rows\n";
  return 0;
}

int cmd_evaluate(const Common& o) {
  const harness::ExperimentConfig c = resolve_config(o);
  const auto result = harness::run_experiment(c, progress);
  harness::write_experiment(c.out, result, harness::run_manifest(c));
  std::cout << result.records.size() << " records, " << result.failures.size() << " failed cells -> " << c.out.string()
            << "\n";
  return result.failures.empty() ? 0 : kPartialFailure;
}

int cmd_ablate(const Common& o) {
  const harness::ExperimentConfig c = resolve_config(o);
  const auto result = harness::run_ablation(c, progress);
  harness::write_ablation(c.out, result, harness::run_manifest(c));
  std::cout << result.records.size() << " ablation records, " << result.failures.size() << " failures -> "
            << c.out.string() << "\n";
  return result.failures.empty() ? 0 : kPartialFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-signal structural anomaly detection: experiments and tools"};
  app.require_subcommand(1);
  Common o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seeds", o.seeds, "Seeds, e.g. 42-46 or 42,44");
    sub->add_option("--out", o.out, "Output file or directory");
    sub->add_option("--dataset", o.datasets, "Dataset family (or table path for fit/score)");
    sub->add_option("--variant", o.variants, "Anomaly variant(s)");
    sub->add_option("--detector", o.detectors, "Detector name(s), or a model file for score");
    sub->add_option("--jobs", o.jobs, "Worker threads");
  };

  auto* generate = app.add_subcommand("generate", "Write a generated dataset as CSV or raw-float table");
  add_common(generate);
  std::size_t size = 0;
  std::string noise = "stddev";
  std::string input;
  std::optional<double> threshold;
  bool tag_split = false;
  generate->add_option("--size", size, "Rows (default: training size of the family)");
  generate->add_option("--noise", noise, "Synthetic noise convention: stddev|variance");
  generate->add_option("--input", input, "Census CSV for the adult family");
  generate->add_option("--threshold", threshold, "Synthetic label threshold on Y (default: own median)");
  generate->add_flag("--split", tag_split, "Tag rows train/val 80/20 instead of test");

  auto* fit = app.add_subcommand("fit", "Fit one detector and save it");
  add_common(fit);
  auto* score = app.add_subcommand("score", "Score a table with a saved detector");
  add_common(score);
  auto* evaluate = app.add_subcommand("evaluate", "Run the detector-by-dataset-by-seed experiment");
  add_common(evaluate);
  auto* ablate = app.add_subcommand("ablate", "Run the ablation variants on the synthetic family");
  add_common(ablate);
  auto* report = app.add_subcommand("report", "Render tables and plots from a result directory");
  add_common(report);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*generate) return cmd_generate(o, size, noise, input, threshold, tag_split);
    if (*fit) return cmd_fit(o);
    if (*score) return cmd_score(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*ablate) return cmd_ablate(o);
    if (*report) {
      harness::render_report(o.out.empty() ? "results" : o.out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
