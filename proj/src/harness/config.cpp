#include "spectre/harness/config.hpp"

#include "spectre/common/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace spectre::harness {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("config: " + key + " expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const std::uint64_t v = parse_u64(key, text);
  if (v == 0) throw InvalidInput("config: " + key + " must be positive");
  return static_cast<std::size_t>(v);
}

std::string single(const std::string& key, const std::vector<std::string>& values) {
  if (values.size() != 1) throw InvalidInput("config: " + key + " expects exactly one value");
  return values.front();
}

}  // namespace

const std::vector<std::string>& all_detectors() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{kSpectreName};
    for (auto k : baselines::kAllBaselines) v.push_back(baselines::to_string(k));
    return v;
  }();
  return names;
}

void validate_detector(const std::string& name) {
  const auto& all = all_detectors();
  if (std::find(all.begin(), all.end(), name) == all.end()) throw InvalidInput("unknown detector '" + name + "'");
}

const std::vector<AblationVariant>& all_ablation_variants() {
  static const std::vector<AblationVariant> v{
      AblationVariant::kFull,        AblationVariant::kMinusGauss,    AblationVariant::kMinusFtMahaP,
      AblationVariant::kMinusInMaha, AblationVariant::kMinusODIN,     AblationVariant::kMinusUSD,
      AblationVariant::kMinusMI,     AblationVariant::kMinusEnergy,   AblationVariant::kMinusEntropy,
      AblationVariant::kNoGaussLoss, AblationVariant::kSingleModelK1, AblationVariant::kGaussOnly,
      AblationVariant::kInMahaOnly,  AblationVariant::kOdinOnly};
  return v;
}

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "Full";
    case AblationVariant::kMinusGauss: return "MinusGauss";
    case AblationVariant::kMinusFtMahaP: return "MinusFtMahaP";
    case AblationVariant::kMinusInMaha: return "MinusInMaha";
    case AblationVariant::kMinusODIN: return "MinusODIN";
    case AblationVariant::kMinusUSD: return "MinusUSD";
    case AblationVariant::kMinusMI: return "MinusMI";
    case AblationVariant::kMinusEnergy: return "MinusEnergy";
    case AblationVariant::kMinusEntropy: return "MinusEntropy";
    case AblationVariant::kNoGaussLoss: return "NoGaussLoss";
    case AblationVariant::kSingleModelK1: return "SingleModel_k1";
    case AblationVariant::kGaussOnly: return "GaussOnly";
    case AblationVariant::kInMahaOnly: return "InMahaOnly";
    case AblationVariant::kOdinOnly: return "OdinOnly";
  }
  throw InvalidInput("unknown ablation variant");
}

AblationVariant parse_ablation_variant(const std::string& name) {
  for (auto v : all_ablation_variants()) {
    if (to_string(v) == name) return v;
  }
  throw InvalidInput("unknown ablation variant '" + name + "'");
}

std::vector<std::string> ExperimentConfig::anomaly_variants(data::Family family) const {
  if (auto it = variants.find(family); it != variants.end()) return it->second;
  std::vector<std::string> out;
  if (family == data::Family::kFeatures) {
    for (const auto& [name, path] : features_tests) {
      if (name != "regular") out.push_back(name);
    }
    return out;
  }
  for (const auto& v : data::variants_of(family)) {
    if (v != "regular") out.push_back(v);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InvalidInput("config: seeds must not be empty");
  if (datasets.empty()) throw InvalidInput("config: datasets must not be empty");
  if (detectors.empty()) throw InvalidInput("config: detectors must not be empty");
  if (jobs == 0) throw InvalidInput("config: jobs must be positive");
  for (const auto& d : detectors) validate_detector(d);
  std::set<data::Family> seen;
  for (auto family : datasets) {
    if (!seen.insert(family).second) throw InvalidInput("config: dataset " + data::to_string(family) + " listed twice");
    const auto list = anomaly_variants(family);
    if (list.empty()) throw InvalidInput("config: no anomaly variants for dataset " + data::to_string(family));
    for (const auto& v : list) {
      if (v == "regular") throw InvalidInput("config: 'regular' is the reference set, not an anomaly variant");
      if (family == data::Family::kFeatures) {
        if (!features_tests.count(v)) throw InvalidInput("config: no features.test." + v + " path");
      } else {
        data::validate_variant(family, v);
      }
    }
    if (family == data::Family::kAdult && adult_csv.empty()) throw InvalidInput("config: adult requires adult.csv");
    if (family == data::Family::kFeatures) {
      if (features_train.empty()) throw InvalidInput("config: features requires features.train");
      if (!features_tests.count("regular")) throw InvalidInput("config: features requires features.test.regular");
    }
  }
  spectre.backbone.validate();
  baseline.optimizer.validate();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_u64("seeds", item));
      continue;
    }
    const std::uint64_t lo = parse_u64("seeds", trim(item.substr(0, dash)));
    const std::uint64_t hi = parse_u64("seeds", trim(item.substr(dash + 1)));
    if (hi < lo || hi - lo > 100000) throw InvalidInput("config: bad seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw InvalidInput("config: seeds must not be empty");
  return seeds;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  const auto path_of = [&](const std::string& value) {
    std::filesystem::path p(value);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    const auto values = split_list(raw);
    if (!seen.insert(key).second) throw InvalidInput("config line " + std::to_string(lineno) + ": duplicate key " + key);

    if (key == "datasets") {
      c.datasets.clear();
      for (const auto& v : values) c.datasets.push_back(data::parse_family(v));
    } else if (key.rfind("variants.", 0) == 0) {
      c.variants[data::parse_family(key.substr(9))] = values;
    } else if (key == "detectors") {
      c.detectors = values;
    } else if (key == "seeds") {
      c.seeds = parse_seed_list(raw);
    } else if (key == "out") {
      c.out = path_of(single(key, values));
    } else if (key == "jobs") {
      c.jobs = parse_count(key, single(key, values));
    } else if (key == "noise") {
      c.noise = data::parse_noise_convention(single(key, values));
    } else if (key == "synthetic.train") {
      c.sizes.synthetic_train = parse_count(key, single(key, values));
    } else if (key == "synthetic.test") {
      c.sizes.synthetic_test = parse_count(key, single(key, values));
    } else if (key == "gridworld.train") {
      c.sizes.gridworld_train = parse_count(key, single(key, values));
    } else if (key == "gridworld.test") {
      c.sizes.gridworld_test = parse_count(key, single(key, values));
    } else if (key == "adult.test") {
      c.sizes.adult_test = parse_count(key, single(key, values));
    } else if (key == "adult.csv") {
      c.adult_csv = path_of(single(key, values));
    } else if (key == "features.train") {
      c.features_train = path_of(single(key, values));
    } else if (key.rfind("features.test.", 0) == 0) {
      c.features_tests[key.substr(14)] = path_of(single(key, values));
    } else if (key == "ablation.variants") {
      c.ablation_variants.clear();
      for (const auto& v : values) c.ablation_variants.push_back(parse_ablation_variant(v));
    } else if (key == "spectre.epochs") {
      c.spectre.backbone.max_epochs = parse_count(key, single(key, values));
    } else if (key == "spectre.patience") {
      c.spectre.backbone.patience = parse_count(key, single(key, values));
    } else if (key == "spectre.pseudo_ood") {
      c.spectre.pseudo_ood = parse_count(key, single(key, values));
    } else if (key == "spectre.causal") {
      const std::string v = single(key, values);
      if (v != "on" && v != "off") throw InvalidInput("config: spectre.causal expects on|off");
      c.spectre.use_causal = v == "on";
    } else if (key == "usd.epochs") {
      c.spectre.usd.epochs = parse_count(key, single(key, values));
      c.baseline.usd_epochs = c.spectre.usd.epochs;
    } else if (key == "causal.epochs") {
      c.spectre.causal.max_epochs = parse_count(key, single(key, values));
    } else if (key == "causal.patience") {
      c.spectre.causal.patience = parse_count(key, single(key, values));
    } else if (key == "baseline.epochs") {
      c.baseline.optimizer.max_epochs = parse_count(key, single(key, values));
    } else if (key == "baseline.patience") {
      c.baseline.optimizer.patience = parse_count(key, single(key, values));
    } else if (key == "baseline.mc_passes") {
      c.baseline.mc_passes = parse_count(key, single(key, values));
    } else {
      throw InvalidInput("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::uint64_t detector_seed(std::uint64_t seed, const std::string& detector, const std::string& dataset) {
  return derive_seed(seed, detector, dataset);
}

}  // namespace spectre::harness
