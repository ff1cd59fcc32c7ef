#pragma once

#include <vector>

#include "sic/algo/trainer.hpp"
#include "sic/eval/theory.hpp"
#include "sic/mlp.hpp"
#include "sic/rng.hpp"

namespace sic {

// How one team's policies carve the signal space: each sampled signal is
// mapped to the joint action the (greedy) policies take under it.
struct PartitionProbe {
  std::vector<std::vector<double>> signals;  // one per probe, length D_z
  std::vector<int> joint_actions;            // mixed-radix index over members
  std::vector<double> frequencies;           // per joint action, sums to 1
};

// Samples n_signals standard-normal signals and records the joint action the
// team takes for each under the fixed per-member observations. Greedy mode
// takes every member's argmax action (the deterministic "zone" view); with
// greedy=false actions are sampled from each member's distribution instead.
// D_z = 0 leaves nothing to probe and raises ConfigError.
PartitionProbe probe_signal_partition(const std::vector<const Mlp*>& policies,
                                      const std::vector<std::vector<double>>& member_obs,
                                      const std::vector<int>& n_actions, int dz, int n_signals,
                                      Rng& rng, bool greedy = true);

// Monte-Carlo estimate of the team's joint-action distribution under the
// given observation, marginalized over the signal: per sample a fresh signal
// is drawn (when dz > 0) and every member samples from its own distribution.
// Works for two-member teams; rows index the first member's action.
JointDistribution joint_policy_frequencies(const std::vector<const Mlp*>& policies,
                                           const std::vector<std::vector<double>>& member_obs,
                                           const std::vector<int>& n_actions, int dz,
                                           int n_samples, Rng& rng);

// Plug-in mutual information (nats) between a signal and a discrete action:
// each signal dimension is cut into equal-count quantile bins, and I(Z;A) is
// read off the resulting contingency table. Biased up by sparse cells, so use
// sample sizes well above bins^dim.
double mutual_information_zbins(const std::vector<std::vector<double>>& signals,
                                const std::vector<int>& actions, int n_action_values,
                                int bins_per_dim = 10);

struct ReconstructionCheck {
  double mse = 0.0;       // reconstruction error against the drawn signals
  double baseline = 0.0;  // error of always predicting the signal mean (zero)
};

// Held-out reconstruction quality of a signal-reconstruction net over fresh
// trajectories recorded with hidden vectors. Requires dz > 0 episodes taken
// with record_hiddens on; ParameterError otherwise.
ReconstructionCheck reconstruction_mse(const Mlp& unet, const TeamEnvView& view,
                                       const std::vector<Trajectory>& episodes);

}  // namespace sic
