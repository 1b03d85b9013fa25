#include "spectre/nn/network.hpp"

#include "spectre/nn/losses.hpp"

#include <cmath>
#include <string>

namespace spectre::nn {

namespace {

// d(loss)/d(W) from d(loss)/d(W_eff) for W_eff = W / sigma, sigma = u^T W v
// with u, v held fixed.
Matrix raw_weight_gradient(const DenseLayer& layer, const Matrix& d_effective) {
  if (!layer.has_spectral_norm) return d_effective;
  const double sigma = layer.spectral_estimate();
  if (sigma <= kSpectralFloor) return d_effective / kSpectralFloor;
  const double inv_sigma = 1.0 / sigma;
  const double coupling = (d_effective.array() * layer.weight.array()).sum() * inv_sigma * inv_sigma;
  return d_effective * inv_sigma - coupling * (layer.spectral_u * layer.spectral_v.transpose());
}

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix z = x * layer.effective_weight().transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

Matrix column_vector(const RowVector& row) { return row.transpose(); }

}  // namespace

void Architecture::validate() const {
  if (input_dim == 0 || output_dim == 0) throw InvalidInput("architecture: zero input or output width");
  for (std::size_t w : hidden) {
    if (w == 0) throw InvalidInput("architecture: zero hidden width");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("architecture: dropout rate must lie in [0, 1)");
}

Vector Gradients::flatten() const {
  Eigen::Index total = 0;
  for (const auto& t : tensors) total += t.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const auto& t : tensors) {
    out.segment(offset, t.size()) = Eigen::Map<const Vector>(t.data(), t.size());
    offset += t.size();
  }
  return out;
}

Network::Network(const Architecture& arch, Rng& init_rng) : arch_(arch) {
  arch_.validate();
  std::size_t in = arch_.input_dim;
  for (std::size_t width : arch_.hidden) {
    HiddenBlock block{DenseLayer::initialized(in, width, arch_.spectral_norm, init_rng), std::nullopt};
    if (arch_.batch_norm) block.norm = BatchNormState::initialized(width);
    blocks_.push_back(std::move(block));
    in = width;
  }
  output_ = DenseLayer::initialized(in, arch_.output_dim, arch_.spectral_norm, init_rng);
}

Network Network::from_parts(Architecture arch, std::vector<HiddenBlock> blocks, DenseLayer output) {
  arch.validate();
  if (blocks.size() != arch.hidden.size()) throw InvalidInput("network: block count does not match architecture");
  std::size_t in = arch.input_dim;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].dense.in_dim() != in || blocks[i].dense.out_dim() != arch.hidden[i] ||
        blocks[i].dense.bias.size() != static_cast<Eigen::Index>(arch.hidden[i])) {
      throw InvalidInput("network: layer " + std::to_string(i) + " shape does not match architecture");
    }
    if (blocks[i].norm.has_value() != arch.batch_norm) throw InvalidInput("network: batch-norm layout mismatch");
    in = arch.hidden[i];
  }
  if (output.in_dim() != in || output.out_dim() != arch.output_dim) {
    throw InvalidInput("network: output layer shape does not match architecture");
  }
  Network net;
  net.arch_ = std::move(arch);
  net.blocks_ = std::move(blocks);
  net.output_ = std::move(output);
  return net;
}

ForwardOutput Network::forward(const Matrix& inputs) const { return forward(inputs, Mode::kInference, nullptr); }

ForwardOutput Network::forward(const Matrix& inputs, Mode mode, Rng* rng, ForwardCache* cache) const {
  if (static_cast<std::size_t>(inputs.cols()) != arch_.input_dim) {
    throw InvalidInput("network: expected input width " + std::to_string(arch_.input_dim) + ", got " +
                       std::to_string(inputs.cols()));
  }
  const bool dropout_on = mode != Mode::kInference && arch_.dropout > 0.0;
  if (dropout_on && rng == nullptr) throw InvalidInput("network: dropout requires a random stream");
  const Eigen::Index n = inputs.rows();
  if (cache != nullptr) {
    cache->mode = mode;
    cache->blocks.assign(blocks_.size(), {});
  }

  ForwardOutput out;
  Matrix activation = inputs;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const HiddenBlock& block = blocks_[b];
    ForwardCache::Block* rec = cache != nullptr ? &cache->blocks[b] : nullptr;
    if (rec != nullptr) rec->input = activation;
    Matrix z = affine(activation, block.dense);
    if (block.norm) {
      const BatchNormState& bn = *block.norm;
      Vector mean;
      Vector inv_std;
      if (mode == Mode::kTraining) {
        if (n < 2) throw InvalidInput("network: batch normalization in training mode needs at least 2 rows");
        mean = z.colwise().mean().transpose();
        z.rowwise() -= mean.transpose();
        Vector var = z.array().square().colwise().mean().transpose();
        inv_std = (var.array() + bn.epsilon).rsqrt();
        if (rec != nullptr) {
          rec->batch_mean = mean;
          rec->batch_var = var;
        }
      } else {
        mean = bn.running_mean;
        inv_std = (bn.running_var.array() + bn.epsilon).rsqrt();
        z.rowwise() -= mean.transpose();
      }
      z = z * inv_std.asDiagonal();
      if (rec != nullptr) {
        rec->normalized = z;
        rec->inv_std = inv_std;
      }
      z = z * bn.gamma.asDiagonal();
      z.rowwise() += bn.beta.transpose();
    }
    if (rec != nullptr) rec->pre_relu = z;
    Matrix h = arch_.has_relu(b) ? Matrix(z.cwiseMax(0.0)) : z;
    if (b + 1 == blocks_.size()) out.features = h;
    if (dropout_on) {
      const double keep = 1.0 - arch_.dropout;
      Matrix scale(h.rows(), h.cols());
      for (Eigen::Index c = 0; c < scale.cols(); ++c) {
        for (Eigen::Index r = 0; r < scale.rows(); ++r) scale(r, c) = rng->uniform() < keep ? 1.0 / keep : 0.0;
      }
      h = h.cwiseProduct(scale);
      if (rec != nullptr) rec->dropout_scale = std::move(scale);
    }
    activation = std::move(h);
  }
  if (blocks_.empty()) out.features = inputs;
  if (cache != nullptr) cache->final_input = activation;
  out.logits = affine(activation, output_);
  return out;
}

Gradients Network::backward(const ForwardCache& cache, const Matrix& d_logits, const Matrix* d_features,
                            Matrix* d_inputs) const {
  const Eigen::Index n = d_logits.rows();
  Gradients grads;

  grads.tensors.reserve(4 * blocks_.size() + 2);
  Matrix d_out_weight = raw_weight_gradient(output_, d_logits.transpose() * cache.final_input);
  Matrix d_out_bias = column_vector(d_logits.colwise().sum());
  Matrix d_activation = d_logits * output_.effective_weight();

  if (blocks_.empty() && d_features != nullptr) d_activation += *d_features;

  std::vector<std::vector<Matrix>> per_block(blocks_.size());
  for (std::size_t bi = blocks_.size(); bi-- > 0;) {
    const HiddenBlock& block = blocks_[bi];
    const ForwardCache::Block& rec = cache.blocks[bi];
    Matrix d_h = rec.dropout_scale.size() > 0 ? Matrix(d_activation.cwiseProduct(rec.dropout_scale)) : d_activation;
    if (bi + 1 == blocks_.size() && d_features != nullptr) d_h += *d_features;
    Matrix d_z = arch_.has_relu(bi) ? Matrix((rec.pre_relu.array() > 0.0).select(d_h, 0.0)) : d_h;

    std::vector<Matrix>& out = per_block[bi];
    Matrix d_gamma;
    Matrix d_beta;
    if (block.norm) {
      const BatchNormState& bn = *block.norm;
      d_gamma = column_vector((d_z.cwiseProduct(rec.normalized)).colwise().sum());
      d_beta = column_vector(d_z.colwise().sum());
      Matrix d_hat = d_z * bn.gamma.asDiagonal();
      if (cache.mode == Mode::kTraining) {
        const RowVector sum_d = d_hat.colwise().sum();
        const RowVector sum_dx = d_hat.cwiseProduct(rec.normalized).colwise().sum();
        Matrix centered = d_hat * static_cast<double>(n);
        centered.rowwise() -= sum_d;
        centered -= rec.normalized * sum_dx.asDiagonal();
        d_z = centered * (rec.inv_std / static_cast<double>(n)).asDiagonal();
      } else {
        d_z = d_hat * rec.inv_std.asDiagonal();
      }
    }
    out.push_back(raw_weight_gradient(block.dense, d_z.transpose() * rec.input));
    out.push_back(column_vector(d_z.colwise().sum()));
    if (block.norm) {
      out.push_back(std::move(d_gamma));
      out.push_back(std::move(d_beta));
    }
    d_activation = d_z * block.dense.effective_weight();
  }
  for (auto& tensors : per_block) {
    for (auto& t : tensors) grads.tensors.push_back(std::move(t));
  }
  grads.tensors.push_back(std::move(d_out_weight));
  grads.tensors.push_back(std::move(d_out_bias));
  if (d_inputs != nullptr) *d_inputs = std::move(d_activation);
  return grads;
}

Matrix Network::input_gradient(const Matrix& inputs, double temperature) const {
  ForwardCache cache;
  ForwardOutput out = forward(inputs, Mode::kInference, nullptr, &cache);
  Matrix probs = softmax(out.logits / temperature);
  Matrix d_logits = -probs / temperature;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    Eigen::Index best = 0;
    probs.row(r).maxCoeff(&best);
    d_logits(r, best) += 1.0 / temperature;
  }
  Matrix d_inputs;
  backward(cache, d_logits, nullptr, &d_inputs);
  return d_inputs;
}

void Network::power_iteration() {
  for (auto& block : blocks_) block.dense.power_iteration();
  output_.power_iteration();
}

void Network::update_running_stats(const ForwardCache& cache) {
  if (cache.mode != Mode::kTraining) return;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!blocks_[b].norm) continue;
    BatchNormState& bn = *blocks_[b].norm;
    const ForwardCache::Block& rec = cache.blocks[b];
    const double n = static_cast<double>(rec.input.rows());
    const Vector unbiased = rec.batch_var * (n / (n - 1.0));
    bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * rec.batch_mean;
    bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * unbiased;
  }
}

std::vector<std::span<double>> Network::parameters() {
  std::vector<std::span<double>> out;
  auto add = [&out](auto& tensor) { out.emplace_back(tensor.data(), static_cast<std::size_t>(tensor.size())); };
  for (auto& block : blocks_) {
    add(block.dense.weight);
    add(block.dense.bias);
    if (block.norm) {
      add(block.norm->gamma);
      add(block.norm->beta);
    }
  }
  add(output_.weight);
  add(output_.bias);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& block : blocks_) {
    total += static_cast<std::size_t>(block.dense.weight.size() + block.dense.bias.size());
    if (block.norm) total += 2 * block.norm->width();
  }
  return total + static_cast<std::size_t>(output_.weight.size() + output_.bias.size());
}

}  // namespace spectre::nn
