#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "umap/rng.hpp"

namespace umap {

enum class Activation { Tanh, Relu };

/// Fully connected network with a single linear output. Parameters are stored
/// flat, layer by layer: weights (row-major, out x in) followed by biases.
class DenseNet {
 public:
  /// Per-call record of the forward pass, needed by backward().
  struct Trace {
    std::vector<std::vector<double>> inputs;  // input to each layer (after dropout)
    std::vector<std::vector<double>> pre;     // pre-activation of each hidden layer
    std::vector<std::vector<double>> masks;   // dropout scale per hidden unit (empty if inactive)
  };

  DenseNet() = default;
  DenseNet(std::vector<int> layer_sizes, Activation activation);

  /// Glorot-uniform weights, zero biases. The output layer is scaled by
  /// `output_gain` so a fresh network starts close to its output bias.
  void initialize(Rng& rng, double output_gain = 1.0);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_size() const { return sizes_.front(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  double& output_bias() { return params_.back(); }

  /// Deterministic forward pass.
  double forward(std::span<const double> input, Trace* trace = nullptr) const;

  /// Forward pass with inverted dropout on every hidden layer: each unit is
  /// kept with probability 1 - drop_p and scaled by 1 / (1 - drop_p).
  double forward_dropout(std::span<const double> input, double drop_p, Rng& rng, Trace* trace = nullptr) const;

  /// Accumulates d(output)/d(params) * d_output into grad.
  void backward(const Trace& trace, double d_output, std::span<double> grad) const;

 private:
  double run(std::span<const double> input, double drop_p, Rng* rng, Trace* trace) const;

  std::vector<int> sizes_;
  Activation activation_ = Activation::Tanh;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
};

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace umap
