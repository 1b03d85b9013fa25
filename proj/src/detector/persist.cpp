#include "spectre/detector/persist.hpp"

#include "spectre/signals/serialize.hpp"

namespace spectre::detector {

using nn::network_from_json;
using nn::network_to_json;
using nn::vector_from_json;
using nn::vector_to_json;
using signals::mahalanobis_from_json;
using signals::mahalanobis_to_json;

namespace {

constexpr const char* kFormat = "spectre.detector/1";

}  // namespace

Json standardizer_to_json(const data::Standardizer& z) {
  return {{"means", vector_to_json(z.means)}, {"stds", vector_to_json(z.stds)}};
}

data::Standardizer standardizer_from_json(const Json& j) {
  data::Standardizer z;
  z.means = vector_from_json(j.at("means"));
  z.stds = vector_from_json(j.at("stds"));
  return z;
}

Json calibration_to_json(const CalibrationState& state) {
  Json sigs = Json::array();
  for (const auto& c : state.signals) {
    sigs.push_back({{"signal", signals::to_string(c.signal)},
                    {"q1", c.q1},
                    {"q99", c.q99},
                    {"flipped", c.flipped},
                    {"degenerate", c.degenerate},
                    {"rho", c.rho}});
  }
  Json ranking = Json::array();
  for (Signal s : state.ranking) ranking.push_back(signals::to_string(s));
  return {{"signals", sigs}, {"ranking", ranking}, {"k", state.k}, {"tau", state.tau}};
}

CalibrationState calibration_from_json(const Json& j) {
  CalibrationState state;
  for (const Json& c : j.at("signals")) {
    SignalCalibration cal;
    cal.signal = signals::parse_signal(c.at("signal").get<std::string>());
    cal.q1 = c.at("q1").get<double>();
    cal.q99 = c.at("q99").get<double>();
    cal.flipped = c.at("flipped").get<bool>();
    cal.degenerate = c.at("degenerate").get<bool>();
    cal.rho = c.at("rho").get<double>();
    state.signals.push_back(cal);
  }
  for (const Json& s : j.at("ranking")) state.ranking.push_back(signals::parse_signal(s.get<std::string>()));
  state.k = j.at("k").get<std::size_t>();
  state.tau = j.at("tau").get<double>();
  if (state.ranking.size() != state.signals.size() || state.k < 1 || state.k > state.ranking.size()) {
    throw InvalidInput("calibration state is inconsistent");
  }
  return state;
}

Json signal_models_to_json(const signals::SignalModels& m) {
  Json ensemble = Json::array();
  for (const auto& net : m.ensemble) ensemble.push_back(network_to_json(net));
  Json out{{"ensemble", ensemble},
           {"plain", network_to_json(m.plain)},
           {"plain_features", mahalanobis_to_json(m.plain_features)},
           {"input_space", mahalanobis_to_json(m.input_space)},
           {"usd",
            {{"net", network_to_json(m.usd.net)},
             {"noise", m.usd.noise == signals::UsdNoise::kScaledCovariance ? "scaled-covariance" : "per-feature"},
             {"noise_rows", m.usd.noise_rows}}},
           {"odin_temperature", m.odin_temperature},
           {"odin_epsilon", m.odin_epsilon}};
  if (m.causal) {
    Json regs = Json::array();
    for (const auto& net : m.causal->regressors) regs.push_back(network_to_json(net));
    out["causal"] = {{"regressors", regs}, {"sigma", vector_to_json(m.causal->sigma)}};
  } else {
    out["causal"] = nullptr;
  }
  return out;
}

signals::SignalModels signal_models_from_json(const Json& j) {
  signals::SignalModels m;
  for (const Json& net : j.at("ensemble")) m.ensemble.push_back(network_from_json(net));
  m.plain = network_from_json(j.at("plain"));
  m.plain_features = mahalanobis_from_json(j.at("plain_features"));
  m.input_space = mahalanobis_from_json(j.at("input_space"));
  const Json& usd = j.at("usd");
  m.usd.net = network_from_json(usd.at("net"));
  m.usd.noise = usd.at("noise").get<std::string>() == "per-feature" ? signals::UsdNoise::kPerFeature
                                                                     : signals::UsdNoise::kScaledCovariance;
  m.usd.noise_rows = usd.at("noise_rows").get<std::size_t>();
  m.odin_temperature = j.at("odin_temperature").get<double>();
  m.odin_epsilon = j.at("odin_epsilon").get<double>();
  if (!j.at("causal").is_null()) {
    signals::CausalModel causal;
    for (const Json& net : j.at("causal").at("regressors")) causal.regressors.push_back(network_from_json(net));
    causal.sigma = vector_from_json(j.at("causal").at("sigma"));
    m.causal = std::move(causal);
  }
  return m;
}

Json detector_to_json(const SpectreDetector& detector, const Json& manifest) {
  return {{"format", kFormat},
          {"standardizer", standardizer_to_json(detector.standardizer())},
          {"models", signal_models_to_json(detector.models())},
          {"calibration", calibration_to_json(detector.calibration())},
          {"manifest", manifest}};
}

SpectreDetector detector_from_json(const Json& j) {
  if (!j.contains("format") || j.at("format") != kFormat) {
    throw InvalidInput("not a detector bundle (expected format " + std::string(kFormat) + ")");
  }
  return SpectreDetector(standardizer_from_json(j.at("standardizer")), signal_models_from_json(j.at("models")),
                         calibration_from_json(j.at("calibration")));
}

void save_detector(const std::filesystem::path& path, const SpectreDetector& detector, const Json& manifest) {
  nn::write_cbor(path, detector_to_json(detector, manifest));
}

SpectreDetector load_detector(const std::filesystem::path& path) { return detector_from_json(nn::read_cbor(path)); }

}  // namespace spectre::detector
