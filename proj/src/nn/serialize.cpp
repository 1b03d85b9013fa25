#include "spectre/nn/serialize.hpp"

#include <fstream>
#include <iterator>

namespace spectre::nn {

Json matrix_to_json(const Matrix& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(values)}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& values = j.at("data");
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw InvalidInput("matrix payload size mismatch");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[k++].get<double>();
  }
  return m;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json architecture_to_json(const Architecture& arch) {
  return Json{{"input_dim", arch.input_dim},         {"hidden", arch.hidden},
              {"output_dim", arch.output_dim},       {"dropout", arch.dropout},
              {"spectral_norm", arch.spectral_norm}, {"batch_norm", arch.batch_norm},
              {"relu_penultimate", arch.relu_penultimate}};
}

Architecture architecture_from_json(const Json& j) {
  Architecture arch;
  arch.input_dim = j.at("input_dim").get<std::size_t>();
  arch.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  arch.output_dim = j.at("output_dim").get<std::size_t>();
  arch.dropout = j.at("dropout").get<double>();
  arch.spectral_norm = j.at("spectral_norm").get<bool>();
  arch.batch_norm = j.at("batch_norm").get<bool>();
  arch.relu_penultimate = j.at("relu_penultimate").get<bool>();
  return arch;
}

namespace {

Json layer_to_json(const DenseLayer& layer) {
  Json j{{"weight", matrix_to_json(layer.weight)},
         {"bias", vector_to_json(layer.bias)},
         {"spectral", layer.has_spectral_norm}};
  if (layer.has_spectral_norm) {
    j["u"] = vector_to_json(layer.spectral_u);
    j["v"] = vector_to_json(layer.spectral_v);
    j["sigma"] = layer.sigma;
  }
  return j;
}

DenseLayer layer_from_json(const Json& j) {
  DenseLayer layer;
  layer.weight = matrix_from_json(j.at("weight"));
  layer.bias = vector_from_json(j.at("bias"));
  layer.has_spectral_norm = j.at("spectral").get<bool>();
  if (layer.has_spectral_norm) {
    layer.spectral_u = vector_from_json(j.at("u"));
    layer.spectral_v = vector_from_json(j.at("v"));
    layer.sigma = j.at("sigma").get<double>();
  }
  return layer;
}

}  // namespace

Json network_to_json(const Network& net) {
  Json blocks = Json::array();
  for (const auto& block : net.blocks()) {
    Json b{{"dense", layer_to_json(block.dense)}};
    if (block.norm) {
      const auto& bn = *block.norm;
      b["norm"] = Json{{"gamma", vector_to_json(bn.gamma)},
                       {"beta", vector_to_json(bn.beta)},
                       {"running_mean", vector_to_json(bn.running_mean)},
                       {"running_var", vector_to_json(bn.running_var)},
                       {"momentum", bn.momentum},
                       {"epsilon", bn.epsilon}};
    }
    blocks.push_back(std::move(b));
  }
  return Json{{"format", "spectre.network/1"},
              {"architecture", architecture_to_json(net.architecture())},
              {"blocks", std::move(blocks)},
              {"output", layer_to_json(net.output_layer())}};
}

Network network_from_json(const Json& j) {
  if (j.value("format", "") != "spectre.network/1") throw InvalidInput("not a serialized network");
  std::vector<HiddenBlock> blocks;
  for (const auto& b : j.at("blocks")) {
    HiddenBlock block{layer_from_json(b.at("dense")), std::nullopt};
    if (b.contains("norm")) {
      const auto& n = b.at("norm");
      block.norm = BatchNormState{vector_from_json(n.at("gamma")), vector_from_json(n.at("beta")),
                                  vector_from_json(n.at("running_mean")), vector_from_json(n.at("running_var")),
                                  n.at("momentum").get<double>(), n.at("epsilon").get<double>()};
    }
    blocks.push_back(std::move(block));
  }
  return Network::from_parts(architecture_from_json(j.at("architecture")), std::move(blocks),
                             layer_from_json(j.at("output")));
}

void write_cbor(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::vector<std::uint8_t> bytes = Json::to_cbor(doc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Json read_cbor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Json::from_cbor(bytes);
}

}  // namespace spectre::nn
