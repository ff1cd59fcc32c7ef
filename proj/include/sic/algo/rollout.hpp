#pragma once

#include <functional>
#include <span>

#include "sic/algo/trajectory.hpp"
#include "sic/env/env.hpp"
#include "sic/mlp.hpp"

namespace sic {

enum class PolicyMode { StochasticSoftmax, DeterministicGumbel };

// How actions are drawn from a policy's output.
//   Train:  stochastic policies sample their softmax; deterministic-gumbel
//           policies act epsilon-greedily on the argmax.
//   Sample: stochastic draw for both kinds (gumbel-max for logits).
//   Greedy: argmax for both kinds.
enum class ExecMode { Train, Sample, Greedy };

struct PolicyHandle {
  const Mlp* net = nullptr;
  PolicyMode mode = PolicyMode::StochasticSoftmax;
  int signal_dim = 0;     // the owning team's D_z; policy input is obs then z
  double epsilon = 0.0;   // exploration rate in Train mode (gumbel policies)
};

int select_action(const PolicyHandle& policy, std::span<const double> obs,
                  std::span<const double> signal, ExecMode exec, Rng& rng);

int categorical_sample(std::span<const double> probs, Rng& rng);
int argmax_index(std::span<const double> values);

struct RolloutSpec {
  env::Env* env = nullptr;
  std::vector<PolicyHandle> policies;  // per agent
  ExecMode exec = ExecMode::Train;
  Rng* env_rng = nullptr;
  std::vector<Rng*> signal_rngs;  // per team
  std::vector<Rng*> action_rngs;  // per agent
  bool record_hiddens = false;
  bool reset_env = true;  // false replays from the env's current state
  std::string env_id;
  // Fired after each env step with the in-progress trajectory (latest step is
  // steps.back()) and the post-step observations. Lets off-policy trainers
  // store transitions and update mid-episode.
  std::function<void(const Trajectory&, const std::vector<std::vector<double>>&)> on_step;
};

// Resets the environment, draws one signal per team, and plays the episode to
// completion. Streams are consumed in a fixed order (env, signals by team,
// then one agent at a time per step) so runs are reproducible.
Trajectory run_episode(const RolloutSpec& spec);

}  // namespace sic
