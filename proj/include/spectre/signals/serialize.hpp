#pragma once

#include "spectre/nn/serialize.hpp"
#include "spectre/signals/mahalanobis.hpp"

namespace spectre::signals {

nn::Json mahalanobis_to_json(const MahalanobisModel& m);
MahalanobisModel mahalanobis_from_json(const nn::Json& j);

}  // namespace spectre::signals
