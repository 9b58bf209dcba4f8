#include "umap/network.hpp"

#include <cmath>

#include "umap/common.hpp"

namespace umap {

DenseNet::DenseNet(std::vector<int> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2 || sizes_.back() != 1) throw ConfigError("network: need at least one layer and a scalar output");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1) throw ConfigError("network: layer sizes must be positive");
    offsets_.push_back(n);
    n += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]) +
         static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.assign(n, 0.0);
}

void DenseNet::initialize(Rng& rng, double output_gain) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    double limit = std::sqrt(6.0 / (in + out));
    if (l + 2 == sizes_.size()) limit *= output_gain;
    double* w = params_.data() + offsets_[l];
    for (int i = 0; i < in * out; ++i) w[i] = sample_uniform(rng, -limit, limit);
    for (int i = 0; i < out; ++i) w[in * out + i] = 0.0;
  }
}

double DenseNet::forward(std::span<const double> input, Trace* trace) const {
  return run(input, 0.0, nullptr, trace);
}

double DenseNet::forward_dropout(std::span<const double> input, double drop_p, Rng& rng, Trace* trace) const {
  return run(input, drop_p, &rng, trace);
}

double DenseNet::run(std::span<const double> input, double drop_p, Rng* rng, Trace* trace) const {
  if (static_cast<int>(input.size()) != sizes_.front()) throw DataError("network: wrong input size");
  const std::size_t layers = sizes_.size() - 1;
  if (trace) {
    trace->inputs.resize(layers);
    trace->pre.resize(layers - 1);
    trace->masks.assign(layers - 1, {});
  }
  std::vector<double> act(input.begin(), input.end());
  std::vector<double> next;
  std::bernoulli_distribution keep(1.0 - drop_p);
  const double keep_scale = 1.0 / (1.0 - drop_p);

  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::ptrdiff_t>(in) * out;
    if (trace) trace->inputs[l] = act;
    next.assign(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
      for (int i = 0; i < in; ++i) s += row[i] * act[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = s;
    }
    if (l + 1 == layers) return next[0];

    if (trace) trace->pre[l] = next;
    for (double& v : next) v = activation_ == Activation::Tanh ? std::tanh(v) : std::max(0.0, v);
    if (rng && drop_p > 0.0) {
      std::vector<double> mask(next.size());
      for (std::size_t i = 0; i < next.size(); ++i) {
        mask[i] = keep(*rng) ? keep_scale : 0.0;
        next[i] *= mask[i];
      }
      if (trace) trace->masks[l] = std::move(mask);
    }
    act.swap(next);
  }
  return 0.0;  // unreachable: the last layer returns
}

void DenseNet::backward(const Trace& trace, double d_output, std::span<double> grad) const {
  const std::size_t layers = sizes_.size() - 1;
  std::vector<double> delta{d_output};
  std::vector<double> prev;
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + static_cast<std::ptrdiff_t>(in) * out;
    const auto& x = trace.inputs[l];
    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[o] += d;
      double* grow = gw + static_cast<std::ptrdiff_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * x[static_cast<std::size_t>(i)];
    }
    if (l == 0) break;

    prev.assign(static_cast<std::size_t>(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
      for (int i = 0; i < in; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
    }
    // Back through dropout and the activation of hidden layer l - 1.
    const auto& pre = trace.pre[l - 1];
    const auto& mask = trace.masks[l - 1];
    for (int i = 0; i < in; ++i) {
      const auto k = static_cast<std::size_t>(i);
      double g = prev[k];
      if (!mask.empty()) g *= mask[k];
      if (activation_ == Activation::Tanh) {
        const double t = std::tanh(pre[k]);
        g *= 1.0 - t * t;
      } else if (pre[k] <= 0.0) {
        g = 0.0;
      }
      prev[k] = g;
    }
    delta.swap(prev);
  }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace umap
