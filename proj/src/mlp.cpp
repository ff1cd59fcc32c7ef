#include "sic/mlp.hpp"

#include <cmath>

namespace sic {

Mlp::Mlp(MlpSpec spec, Rng& init_rng) : spec_(std::move(spec)) {
  spec_.validate();
  int layers = static_cast<int>(spec_.layer_sizes.size()) - 1;
  params_.reserve(static_cast<size_t>(layers) * 2);
  for (int l = 0; l < layers; ++l) {
    int fan_in = spec_.layer_sizes[static_cast<size_t>(l)];
    int fan_out = spec_.layer_sizes[static_cast<size_t>(l) + 1];
    Tensor w = Tensor::matrix(fan_out, fan_in);
    double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.values) v = init_rng.uniform(-s, s);
    params_.push_back(std::move(w));
    params_.push_back(Tensor::vector(fan_out));
  }
}

Mlp::Fwd Mlp::forward(ad::Tape& tape, ad::NodeId input) {
  if (params_.empty()) throw ParameterError("Mlp::forward: uninitialized network");
  if (tape.dim(input).cols != spec_.input_dim())
    throw InputShapeError("Mlp::forward: input cols != spec input dim");

  ad::NodeId x = input;
  ad::NodeId hidden = input;
  int layers = static_cast<int>(params_.size()) / 2;
  for (int l = 0; l < layers; ++l) {
    ad::NodeId w = tape.param(params_[static_cast<size_t>(l) * 2]);
    ad::NodeId b = tape.param(params_[static_cast<size_t>(l) * 2 + 1]);
    x = tape.affine(w, b, x);
    if (l < layers - 1) {
      switch (spec_.hidden_activations[static_cast<size_t>(l)]) {
        case Activation::ReLU:
          x = tape.relu(x);
          break;
        case Activation::Tanh:
          x = tape.tanh_op(x);
          break;
        case Activation::Identity:
          break;
      }
      hidden = x;
    }
  }
  if (spec_.output_activation == OutputActivation::Softmax) x = tape.softmax_rows(x);
  return {x, hidden};
}

void Mlp::infer(std::span<const double> input, std::vector<double>& output,
                std::vector<double>* hidden) const {
  if (params_.empty()) throw ParameterError("Mlp::infer: uninitialized network");
  if (static_cast<int>(input.size()) != spec_.input_dim())
    throw InputShapeError("Mlp::infer: input length != spec input dim");

  std::vector<double> cur(input.begin(), input.end());
  if (hidden) *hidden = cur;
  std::vector<double> next;
  int layers = static_cast<int>(params_.size()) / 2;
  for (int l = 0; l < layers; ++l) {
    const Tensor& w = params_[static_cast<size_t>(l) * 2];
    const Tensor& b = params_[static_cast<size_t>(l) * 2 + 1];
    int out = w.shape[0], in = w.shape[1];
    next.assign(static_cast<size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      const double* wo = w.values.data() + static_cast<size_t>(o) * in;
      double acc = b.values[static_cast<size_t>(o)];
      for (int i = 0; i < in; ++i) acc += cur[static_cast<size_t>(i)] * wo[i];
      next[static_cast<size_t>(o)] = acc;
    }
    cur.swap(next);
    if (l < layers - 1) {
      switch (spec_.hidden_activations[static_cast<size_t>(l)]) {
        case Activation::ReLU:
          for (double& v : cur) v = v > 0.0 ? v : 0.0;
          break;
        case Activation::Tanh:
          for (double& v : cur) v = std::tanh(v);
          break;
        case Activation::Identity:
          break;
      }
      if (hidden) *hidden = cur;
    }
  }
  if (spec_.output_activation == OutputActivation::Softmax) {
    double mx = cur[0];
    for (double v : cur) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : cur) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : cur) v /= sum;
  }
  output = std::move(cur);
}

std::vector<Tensor*> Mlp::param_ptrs() {
  std::vector<Tensor*> out;
  out.reserve(params_.size());
  for (Tensor& t : params_) out.push_back(&t);
  return out;
}

int Mlp::param_count() const {
  int n = 0;
  for (const Tensor& t : params_) n += t.size();
  return n;
}

int Mlp::hidden_dim() const {
  if (spec_.hidden_layer_count() == 0) return spec_.input_dim();
  return spec_.layer_sizes[spec_.layer_sizes.size() - 2];
}

void Mlp::copy_params_from(const Mlp& other) {
  if (params_.size() != other.params_.size())
    throw ShapeError("Mlp::copy_params_from: layer count mismatch");
  for (size_t i = 0; i < params_.size(); ++i) params_[i].values = other.params_[i].values;
}

void Mlp::soft_update_from(const Mlp& online, double rate) {
  if (params_.size() != online.params_.size())
    throw ShapeError("Mlp::soft_update_from: layer count mismatch");
  for (size_t i = 0; i < params_.size(); ++i) {
    const std::vector<double>& src = online.params_[i].values;
    std::vector<double>& dst = params_[i].values;
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += rate * (src[k] - dst[k]);
  }
}

}  // namespace sic
