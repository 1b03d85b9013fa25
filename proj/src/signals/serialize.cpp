#include "spectre/signals/serialize.hpp"

namespace spectre::signals {

using nn::Json;
using nn::matrix_from_json;
using nn::matrix_to_json;
using nn::vector_from_json;
using nn::vector_to_json;

Json mahalanobis_to_json(const MahalanobisModel& m) {
  Json means = Json::array();
  for (const Vector& mu : m.class_means) means.push_back(vector_to_json(mu));
  return {{"class_means", means},
          {"precision", matrix_to_json(m.precision)},
          {"space", m.space == FeatureSpace::kInput ? "input" : "plain-features"},
          {"ridge", m.ridge},
          {"condition_number", m.condition_number}};
}

MahalanobisModel mahalanobis_from_json(const Json& j) {
  MahalanobisModel m;
  for (const Json& mu : j.at("class_means")) m.class_means.push_back(vector_from_json(mu));
  m.precision = matrix_from_json(j.at("precision"));
  m.space = j.at("space").get<std::string>() == "input" ? FeatureSpace::kInput
                                                          : FeatureSpace::kPlainFeatures;
  m.ridge = j.at("ridge").get<double>();
  m.condition_number = j.at("condition_number").get<double>();
  return m;
}

}  // namespace spectre::signals
