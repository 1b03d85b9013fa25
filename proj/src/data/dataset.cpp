#include "spectre/data/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace spectre::data {

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "test";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw InvalidInput("unknown split tag '" + text + "'");
}

int LabeledDataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

IndexList LabeledDataset::rows_in(Split which) const {
  IndexList out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

Matrix LabeledDataset::features_in(Split which) const { return select_rows(features, rows_in(which)); }

LabelList LabeledDataset::labels_in(Split which) const {
  LabelList out;
  for (std::size_t i : rows_in(which)) out.push_back(labels[i]);
  return out;
}

LabeledDataset LabeledDataset::subset(const IndexList& rows) const {
  LabeledDataset out;
  out.features = select_rows(features, rows);
  out.meta = meta;
  out.labels.reserve(rows.size());
  out.split.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(labels[r]);
    out.split.push_back(split[r]);
  }
  return out;
}

std::optional<std::size_t> LabeledDataset::column_index(const std::string& name) const {
  auto it = std::find(meta.columns.begin(), meta.columns.end(), name);
  if (it == meta.columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - meta.columns.begin());
}

void LabeledDataset::validate() const {
  if (labels.size() != rows() || split.size() != rows()) {
    throw InvalidInput("dataset '" + meta.name + "': labels/split length does not match row count");
  }
  if (!meta.columns.empty() && meta.columns.size() != cols()) {
    throw InvalidInput("dataset '" + meta.name + "': column names do not match feature width");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InvalidInput("dataset '" + meta.name + "': negative label at row " + std::to_string(i));
  }
  if (!features.allFinite()) {
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      for (Eigen::Index c = 0; c < features.cols(); ++c) {
        if (!std::isfinite(features(r, c))) {
          throw InvalidInput("dataset '" + meta.name + "': non-finite value at row " + std::to_string(r) +
                             ", column " + std::to_string(c));
        }
      }
    }
  }
}

LabeledDataset with_split(LabeledDataset data, Split which) {
  data.split.assign(data.rows(), which);
  return data;
}

}  // namespace spectre::data
