#pragma once

#include "spectre/common/types.hpp"
#include "spectre/nn/network.hpp"

#include <json.hpp>

#include <filesystem>

namespace spectre::nn {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const Json& j);

/// Architecture, weights, batch-norm running statistics and spectral vectors.
Json network_to_json(const Network& net);
Network network_from_json(const Json& j);

/// Writes `doc` as CBOR (doubles are stored exactly).
void write_cbor(const std::filesystem::path& path, const Json& doc);
Json read_cbor(const std::filesystem::path& path);

}  // namespace spectre::nn
