#pragma once

#include <span>
#include <vector>

#include "sic/rng.hpp"
#include "sic/tape.hpp"
#include "sic/tensor.hpp"

namespace sic {

// Fully connected network. Parameters are stored as interleaved weight/bias
// tensors per layer (W0, b0, W1, b1, ...). Weights are initialized uniform in
// [-s, s] with s = sqrt(6 / (fan_in + fan_out)); biases start at zero.
class Mlp {
 public:
  struct Fwd {
    ad::NodeId output;
    ad::NodeId hidden;  // post-activation of the last hidden layer
  };

  Mlp() = default;
  Mlp(MlpSpec spec, Rng& init_rng);

  // Records the full forward pass on the tape. The returned hidden node is the
  // post-activation output of the last hidden layer (the input node when the
  // network has none), which downstream consumers may feed into other graphs.
  Fwd forward(ad::Tape& tape, ad::NodeId input);

  // Plain inference without gradient tracking. Throws InputShapeError when the
  // input length differs from the spec's input dimension.
  void infer(std::span<const double> input, std::vector<double>& output,
             std::vector<double>* hidden = nullptr) const;

  const MlpSpec& spec() const { return spec_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::vector<Tensor*> param_ptrs();
  int param_count() const;
  int hidden_dim() const;

  void copy_params_from(const Mlp& other);
  // target <- target + rate * (online - target), applied elementwise
  void soft_update_from(const Mlp& online, double rate);

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

}  // namespace sic
