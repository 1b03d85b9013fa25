#include "spectre/signals/bundle.hpp"

#include "spectre/nn/losses.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>

namespace spectre::signals {

bool SignalBundle::has(Signal s) const { return std::find(names.begin(), names.end(), s) != names.end(); }

Vector SignalBundle::column(Signal s) const {
  const auto it = std::find(names.begin(), names.end(), s);
  if (it == names.end()) throw InvalidInput("bundle has no signal " + to_string(s));
  return values.col(it - names.begin());
}

SignalBundle SignalBundle::without(Signal s) const {
  std::vector<Signal> keep;
  for (Signal n : names) {
    if (n != s) keep.push_back(n);
  }
  return only(keep);
}

SignalBundle SignalBundle::only(const std::vector<Signal>& keep) const {
  SignalBundle out;
  std::vector<Eigen::Index> cols;
  for (Signal s : kAllSignals) {
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) continue;
    const auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) continue;
    out.names.push_back(s);
    cols.push_back(it - names.begin());
  }
  out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.values.col(static_cast<Eigen::Index>(c)) = values.col(cols[c]);
  return out;
}

void write_bundle_csv(const std::filesystem::path& path, const SignalBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < bundle.names.size(); ++c) out << (c ? "," : "") << to_string(bundle.names[c]);
  out << '\n';
  std::array<char, 32> buf{};
  for (Eigen::Index r = 0; r < bundle.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < bundle.values.cols(); ++c) {
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), bundle.values(r, c));
      out << (c ? "," : "") << std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

Matrix ensemble_mean_probs(const SignalModels& models, const Matrix& x) {
  if (models.ensemble.empty()) throw InvalidInput("ensemble_mean_probs: no ensemble members");
  Matrix mean;
  for (const auto& net : models.ensemble) {
    const Matrix p = nn::softmax(net.forward(x).logits);
    mean = mean.size() == 0 ? p : Matrix(mean + p);
  }
  return mean / static_cast<double>(models.ensemble.size());
}

SignalBundle extract_bundle(const SignalModels& models, const Matrix& x) {
  if (models.ensemble.empty()) throw InvalidInput("extract_bundle: no ensemble members");
  std::vector<Matrix> features;
  std::vector<Matrix> logits;
  std::vector<const nn::Network*> members;
  Matrix mean_logits = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(models.ensemble.front().output_dim()));
  for (const auto& net : models.ensemble) {
    nn::ForwardOutput out = net.forward(x);
    mean_logits += out.logits / static_cast<double>(models.ensemble.size());
    features.push_back(std::move(out.features));
    logits.push_back(std::move(out.logits));
    members.push_back(&net);
  }
  const EntropyMi em = entropy_and_mi(logits);

  SignalBundle bundle;
  std::vector<Vector> columns;
  const auto add = [&](Signal s, Vector v) {
    bundle.names.push_back(s);
    columns.push_back(std::move(v));
  };
  add(Signal::kGauss, gauss_scores(features));
  add(Signal::kFtMahaP, models.plain_features.scores(models.plain.forward(x).features));
  add(Signal::kInMaha, models.input_space.scores(x));
  add(Signal::kEnergy, energy_scores(mean_logits));
  add(Signal::kEntropy, em.entropy);
  add(Signal::kMI, em.mi);
  add(Signal::kODIN, odin_scores(members, x, models.odin_temperature, models.odin_epsilon));
  add(Signal::kUSD, models.usd.scores(x));
  if (models.causal) add(Signal::kCausal, models.causal->scores(x));

  bundle.values.resize(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const Vector& v = columns[c];
    for (Eigen::Index r = 0; r < v.size(); ++r) {
      if (!std::isfinite(v(r))) {
        throw InvalidInput("extract_bundle: non-finite " + to_string(bundle.names[c]) + " value at row " +
                           std::to_string(r));
      }
    }
    bundle.values.col(static_cast<Eigen::Index>(c)) = v;
  }
  return bundle;
}

}  // namespace spectre::signals
