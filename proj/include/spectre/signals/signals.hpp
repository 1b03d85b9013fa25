#pragma once

#include "spectre/common/types.hpp"
#include "spectre/nn/network.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spectre::signals {

enum class Signal { kGauss, kFtMahaP, kInMaha, kEnergy, kEntropy, kMI, kODIN, kUSD, kCausal };

/// Canonical order; also the tie-break order for ranking.
inline constexpr std::array<Signal, 9> kAllSignals{Signal::kGauss,   Signal::kFtMahaP, Signal::kInMaha,
                                                   Signal::kEnergy,  Signal::kEntropy, Signal::kMI,
                                                   Signal::kODIN,    Signal::kUSD,     Signal::kCausal};

std::string to_string(Signal s);
Signal parse_signal(const std::string& name);
std::size_t canonical_index(Signal s);

/// Per-row mean over members of log N(h_m; 0, I).
Vector gauss_scores(const std::vector<Matrix>& member_features);
double gauss_score(const std::vector<Vector>& member_features);

/// -logsumexp of each row of the (ensemble-mean) logits.
Vector energy_scores(const Matrix& mean_logits);

struct EntropyMi {
  Vector entropy;  // entropy of the member-averaged softmax
  Vector mi;       // entropy minus the mean member entropy
};
EntropyMi entropy_and_mi(const std::vector<Matrix>& member_logits);

/// Ensemble-mean of the max temperature-scaled softmax after moving each
/// input by `epsilon * sign(grad)`, where grad is the gradient of the log
/// max softmax at temperature T. The step ascends the confidence objective.
Vector odin_scores(const std::vector<const nn::Network*>& members, const Matrix& x, double temperature = 1000.0,
                   double epsilon = 0.002);

}  // namespace spectre::signals
