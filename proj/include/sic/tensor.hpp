#pragma once

#include <numeric>
#include <vector>

#include "sic/errors.hpp"

namespace sic {

// Dense 64-bit float tensor with a gradient buffer of the same length.
// Rank 1 (vectors such as biases) and rank 2 (row-major matrices, [rows, cols])
// cover every network in the toolkit.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;

  static Tensor vector(int n) {
    Tensor t;
    t.shape = {n};
    t.values.assign(static_cast<size_t>(n), 0.0);
    t.grad.assign(static_cast<size_t>(n), 0.0);
    return t;
  }

  static Tensor matrix(int rows, int cols) {
    Tensor t;
    t.shape = {rows, cols};
    t.values.assign(static_cast<size_t>(rows) * cols, 0.0);
    t.grad.assign(static_cast<size_t>(rows) * cols, 0.0);
    return t;
  }

  int size() const {
    int n = 1;
    for (int d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  int rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int cols() const { return shape.empty() ? 0 : shape.back(); }

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

enum class Activation { ReLU, Tanh, Identity };
enum class OutputActivation { Identity, Softmax };

// Architecture of a fully connected network. layer_sizes runs from the input
// dimension through each hidden width to the output dimension.
struct MlpSpec {
  std::vector<int> layer_sizes;
  std::vector<Activation> hidden_activations;  // one per hidden layer
  OutputActivation output_activation = OutputActivation::Identity;

  MlpSpec() = default;

  MlpSpec(std::vector<int> sizes, Activation hidden, OutputActivation out)
      : layer_sizes(std::move(sizes)), output_activation(out) {
    int n_hidden = static_cast<int>(layer_sizes.size()) - 2;
    if (n_hidden > 0) hidden_activations.assign(static_cast<size_t>(n_hidden), hidden);
    validate();
  }

  void validate() const {
    if (layer_sizes.size() < 2)
      throw ParameterError("MlpSpec: layer_sizes needs at least input and output dims");
    for (int s : layer_sizes)
      if (s < 1) throw ParameterError("MlpSpec: every layer size must be >= 1");
    if (hidden_activations.size() != layer_sizes.size() - 2)
      throw ParameterError("MlpSpec: one hidden activation per hidden layer required");
  }

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int hidden_layer_count() const { return static_cast<int>(layer_sizes.size()) - 2; }
};

}  // namespace sic
