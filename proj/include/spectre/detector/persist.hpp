#pragma once

#include "spectre/detector/detector.hpp"
#include "spectre/nn/serialize.hpp"

#include <filesystem>

namespace spectre::detector {

using nn::Json;

Json standardizer_to_json(const data::Standardizer& z);
data::Standardizer standardizer_from_json(const Json& j);

Json calibration_to_json(const CalibrationState& state);
CalibrationState calibration_from_json(const Json& j);

Json signal_models_to_json(const signals::SignalModels& models);
signals::SignalModels signal_models_from_json(const Json& j);

/// Full detector: standardizer, backbones, signal models, calibration and
/// a manifest (free-form, stored verbatim).
Json detector_to_json(const SpectreDetector& detector, const Json& manifest = Json::object());
SpectreDetector detector_from_json(const Json& j);

void save_detector(const std::filesystem::path& path, const SpectreDetector& detector,
                   const Json& manifest = Json::object());
SpectreDetector load_detector(const std::filesystem::path& path);

}  // namespace spectre::detector
