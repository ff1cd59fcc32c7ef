#include "sic/optimizer.hpp"

#include <cmath>

namespace sic {

void adam_step(std::span<Tensor* const> params, AdamState& state, double lr, double clip_norm) {
  if (lr <= 0.0) throw ParameterError("adam_step: lr must be positive");

  size_t total = 0;
  for (const Tensor* t : params) total += t->grad.size();
  if (state.m.empty()) {
    state.m.assign(total, 0.0);
    state.v.assign(total, 0.0);
  }
  if (state.m.size() != total)
    throw ShapeError("adam_step: parameter count changed under one state");

  double sq = 0.0;
  for (const Tensor* t : params) {
    for (double g : t->grad) {
      if (!std::isfinite(g)) throw NumericalError("adam_step: non-finite gradient");
      sq += g * g;
    }
  }
  double scale = 1.0;
  if (clip_norm > 0.0) {
    double norm = std::sqrt(sq);
    if (norm > clip_norm) scale = clip_norm / norm;
  }

  state.step_count += 1;
  double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  size_t k = 0;
  for (Tensor* t : params) {
    for (size_t i = 0; i < t->values.size(); ++i, ++k) {
      double g = t->grad[i] * scale;
      state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
      state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
      double mhat = state.m[k] / b1t;
      double vhat = state.v[k] / b2t;
      t->values[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace sic
