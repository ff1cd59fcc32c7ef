#pragma once

#include <span>
#include <vector>

#include "sic/rng.hpp"
#include "sic/tape.hpp"

namespace sic {

// Draws standard Gumbel noise g = -log(-log(u)) with u clamped to
// (1e-12, 1 - 1e-12) so both logs stay finite.
double gumbel_noise(Rng& rng);

// Relaxed one-hot sample: softmax((logits + g) / temperature). The tape
// variant records the op so gradients flow to the logits; noise is supplied
// by the caller (one value per logit entry) and is treated as a constant.
// Passing all-zero noise gives the deterministic relaxation softmax(logits/t).
ad::NodeId gumbel_softmax_node(ad::Tape& tape, ad::NodeId logits, std::span<const double> noise,
                               double temperature);

// Value-only variant used during rollouts; no gradient bookkeeping.
std::vector<double> gumbel_softmax_sample(std::span<const double> logits, double temperature,
                                          Rng& rng);

// Zero-noise relaxation softmax(logits / temperature); deterministic.
std::vector<double> relaxed_softmax(std::span<const double> logits, double temperature);

}  // namespace sic
