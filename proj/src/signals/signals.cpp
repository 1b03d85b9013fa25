#include "spectre/signals/signals.hpp"

#include "spectre/nn/losses.hpp"

#include <cmath>
#include <numbers>

namespace spectre::signals {

std::string to_string(Signal s) {
  switch (s) {
    case Signal::kGauss: return "Gauss";
    case Signal::kFtMahaP: return "FtMahaP";
    case Signal::kInMaha: return "InMaha";
    case Signal::kEnergy: return "Energy";
    case Signal::kEntropy: return "Entropy";
    case Signal::kMI: return "MI";
    case Signal::kODIN: return "ODIN";
    case Signal::kUSD: return "USD";
    case Signal::kCausal: return "Causal";
  }
  return "?";
}

Signal parse_signal(const std::string& name) {
  for (Signal s : kAllSignals) {
    if (to_string(s) == name) return s;
  }
  throw InvalidInput("unknown signal '" + name + "'");
}

std::size_t canonical_index(Signal s) { return static_cast<std::size_t>(s); }

Vector gauss_scores(const std::vector<Matrix>& member_features) {
  if (member_features.empty()) throw InvalidInput("gauss_scores: no ensemble members");
  const Eigen::Index n = member_features.front().rows();
  const Eigen::Index dim = member_features.front().cols();
  const double constant = -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
  Vector total = Vector::Zero(n);
  for (const Matrix& h : member_features) {
    if (h.rows() != n || h.cols() != dim) throw InvalidInput("gauss_scores: member feature shapes differ");
    total += (constant - 0.5 * h.rowwise().squaredNorm().array()).matrix();
  }
  return total / static_cast<double>(member_features.size());
}

double gauss_score(const std::vector<Vector>& member_features) {
  std::vector<Matrix> rows;
  rows.reserve(member_features.size());
  for (const Vector& h : member_features) rows.emplace_back(h.transpose());
  return gauss_scores(rows)(0);
}

Vector energy_scores(const Matrix& mean_logits) {
  if (mean_logits.cols() < 2) throw InvalidInput("energy_scores: needs at least 2 classes");
  return -nn::log_sum_exp(mean_logits);
}

namespace {

Vector row_entropy(const Matrix& probs) {
  Vector out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double h = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(r, c);
      if (p > 0.0) h -= p * std::log(p);
    }
    out(r) = h;
  }
  return out;
}

}  // namespace

EntropyMi entropy_and_mi(const std::vector<Matrix>& member_logits) {
  if (member_logits.empty()) throw InvalidInput("entropy_and_mi: no ensemble members");
  const double m = static_cast<double>(member_logits.size());
  Matrix mean_probs = Matrix::Zero(member_logits.front().rows(), member_logits.front().cols());
  Vector mean_member_entropy = Vector::Zero(mean_probs.rows());
  for (const Matrix& logits : member_logits) {
    const Matrix p = nn::softmax(logits);
    mean_probs += p / m;
    mean_member_entropy += row_entropy(p) / m;
  }
  EntropyMi out;
  out.entropy = row_entropy(mean_probs);
  out.mi = out.entropy - mean_member_entropy;
  return out;
}

Vector odin_scores(const std::vector<const nn::Network*>& members, const Matrix& x, double temperature,
                   double epsilon) {
  if (members.empty()) throw InvalidInput("odin_scores: no ensemble members");
  Vector total = Vector::Zero(x.rows());
  for (const nn::Network* net : members) {
    Matrix moved = x;
    if (epsilon != 0.0) moved += epsilon * net->input_gradient(x, temperature).array().sign().matrix();
    const Matrix probs = nn::softmax(net->forward(moved).logits / temperature);
    total += probs.rowwise().maxCoeff();
  }
  return total / static_cast<double>(members.size());
}

}  // namespace spectre::signals
