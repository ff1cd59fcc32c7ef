#pragma once

#include <span>
#include <vector>

#include "sic/mlp.hpp"
#include "sic/rng.hpp"
#include "sic/tape.hpp"

namespace sic {

// Team coordination signal, drawn once per team per episode and held constant
// until the episode ends. dim == 0 means "no signal".
struct Signal {
  std::vector<double> values;
  int dim() const { return static_cast<int>(values.size()); }
};

// dim i.i.d. standard-normal components. dim 0 draws nothing from the stream.
Signal sample_signal(int dim, Rng& rng);

// Records the reconstruction z' = f_U(state, hiddens) on the tape. The input
// layout is the concatenation of the global state block with each agent's last
// hidden vector in agent order; a mismatch with the network's input dimension
// raises InputShapeError. Gradients flow into the U-Net parameters and back
// through the hidden nodes into the policies that produced them.
ad::NodeId unet_reconstruct(ad::Tape& tape, Mlp& unet, ad::NodeId state,
                            std::span<const ad::NodeId> hiddens);

// L_I for a batch: mean squared error between reconstructions and the signals
// that were actually drawn, averaged over components and rows.
ad::NodeId mi_loss_node(ad::Tape& tape, ad::NodeId zprime, std::span<const double> z_rows);

// Value-only variant over per-step pairs; rows are (z, z') of equal length.
// Returns exactly 0 when the signal dimension is zero.
double mi_loss(std::span<const double> z, std::span<const double> zprime);
double mi_loss_batch(const std::vector<std::vector<double>>& z_steps,
                     const std::vector<std::vector<double>>& zprime_steps);

}  // namespace sic
