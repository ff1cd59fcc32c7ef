#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sic/tensor.hpp"

namespace sic {

// First and second moment buffers for Adam over one flattened parameter set.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Applies one Adam update with bias correction to the given tensors, reading
// gradients from their grad buffers. When clip_norm > 0 the global gradient
// norm across every tensor is rescaled to at most clip_norm first. A non-finite
// gradient aborts the update with NumericalError before any state changes.
void adam_step(std::span<Tensor* const> params, AdamState& state, double lr, double clip_norm);

// Convenience wrapper owning the state for one network's parameter list.
class AdamOpt {
 public:
  AdamOpt() = default;
  AdamOpt(double lr, double clip_norm) : lr_(lr), clip_(clip_norm) {}

  void step(std::span<Tensor* const> params) { adam_step(params, state_, lr_, clip_); }

  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }
  double lr() const { return lr_; }

 private:
  AdamState state_;
  double lr_ = 1e-3;
  double clip_ = 0.0;
};

}  // namespace sic
