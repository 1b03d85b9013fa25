#pragma once

#include "spectre/common/rng.hpp"
#include "spectre/common/types.hpp"
#include "spectre/nn/layers.hpp"

#include <optional>
#include <span>
#include <vector>

namespace spectre::nn {

/// kTraining: dropout on, batch statistics. kMonteCarlo: dropout on, running
/// statistics (test-time MC sampling). kInference: deterministic.
enum class Mode { kTraining, kMonteCarlo, kInference };

/// Shape and regularization of a ReLU MLP. The last hidden width is the
/// penultimate (feature) dimension.
struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 0;
  double dropout = 0.0;
  bool spectral_norm = false;
  bool batch_norm = false;
  /// When false the last hidden block is affine (+ batch norm) with no ReLU,
  /// so penultimate features can take either sign.
  bool relu_penultimate = true;

  bool has_relu(std::size_t block) const { return relu_penultimate || block + 1 < hidden.size(); }
  std::size_t penultimate_dim() const { return hidden.empty() ? input_dim : hidden.back(); }
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

/// Hidden block: Linear -> [BatchNorm] -> ReLU -> Dropout (ReLU optional on the last block).
struct HiddenBlock {
  DenseLayer dense;
  std::optional<BatchNormState> norm;
};

struct ForwardOutput {
  Matrix logits;    // n x output_dim
  Matrix features;  // n x penultimate_dim (after activation, before dropout)
};

/// Intermediate values kept for backpropagation.
struct ForwardCache {
  Mode mode = Mode::kInference;
  struct Block {
    Matrix input;       // activation entering the dense layer
    Matrix normalized;  // x-hat (batch norm only)
    Vector inv_std;     // per-column 1/sqrt(var + eps)
    Vector batch_mean;
    Vector batch_var;   // biased
    Matrix pre_relu;    // after dense (+ batch norm)
    Matrix dropout_scale;  // empty when dropout is inactive
  };
  std::vector<Block> blocks;
  Matrix final_input;  // activation entering the output layer
};

/// Parameter gradients in the order of Network::parameters().
struct Gradients {
  std::vector<Matrix> tensors;
  Vector flatten() const;
};

/// ReLU MLP backbone: logits plus penultimate features.
class Network {
 public:
  Network() = default;
  Network(const Architecture& arch, Rng& init_rng);

  const Architecture& architecture() const { return arch_; }
  std::size_t input_dim() const { return arch_.input_dim; }
  std::size_t output_dim() const { return arch_.output_dim; }
  std::size_t penultimate_dim() const { return arch_.penultimate_dim(); }

  /// Deterministic inference pass.
  ForwardOutput forward(const Matrix& inputs) const;
  /// Pass in the given mode. `rng` supplies dropout masks (required when the
  /// mode enables dropout and the rate is positive).
  ForwardOutput forward(const Matrix& inputs, Mode mode, Rng* rng, ForwardCache* cache = nullptr) const;

  /// Backpropagates d(loss)/d(logits) and optionally d(loss)/d(features).
  /// Writes d(loss)/d(inputs) when `d_inputs` is non-null.
  Gradients backward(const ForwardCache& cache, const Matrix& d_logits, const Matrix* d_features,
                     Matrix* d_inputs) const;

  /// Gradient of log max_c softmax(logits / T)_c w.r.t. each input row (inference mode).
  Matrix input_gradient(const Matrix& inputs, double temperature) const;

  /// One power-iteration step on every spectrally normalized layer.
  void power_iteration();

  /// Folds the batch statistics recorded in `cache` into running statistics.
  void update_running_stats(const ForwardCache& cache);

  /// Views over every trainable tensor, in a fixed order.
  std::vector<std::span<double>> parameters();
  std::size_t parameter_count() const;

  std::vector<HiddenBlock>& blocks() { return blocks_; }
  const std::vector<HiddenBlock>& blocks() const { return blocks_; }
  DenseLayer& output_layer() { return output_; }
  const DenseLayer& output_layer() const { return output_; }

  /// Rebuilds a network from stored state (used by deserialization).
  static Network from_parts(Architecture arch, std::vector<HiddenBlock> blocks, DenseLayer output);

 private:
  Architecture arch_;
  std::vector<HiddenBlock> blocks_;
  DenseLayer output_;
};

/// Alias used where a trained network plays the backbone role.
using TrainedBackbone = Network;

}  // namespace spectre::nn
