#include "sic/algo/rollout.hpp"

#include <cmath>

namespace sic {

int argmax_index(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[static_cast<size_t>(i)] > values[static_cast<size_t>(best)]) best = i;
  return best;
}

int categorical_sample(std::span<const double> probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    acc += probs[static_cast<size_t>(i)];
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

namespace {

std::vector<double> softmax_copy(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  double mx = p[0];
  for (double v : p) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

int select_action(const PolicyHandle& policy, std::span<const double> obs,
                  std::span<const double> signal, ExecMode exec, Rng& rng) {
  if (!policy.net) throw ParameterError("select_action: missing network");
  std::vector<double> in;
  in.reserve(obs.size() + signal.size());
  in.insert(in.end(), obs.begin(), obs.end());
  in.insert(in.end(), signal.begin(), signal.end());
  std::vector<double> out;
  policy.net->infer(in, out);

  if (policy.mode == PolicyMode::StochasticSoftmax) {
    if (exec == ExecMode::Greedy) return argmax_index(out);
    return categorical_sample(out, rng);
  }

  // deterministic-gumbel: the network emits logits
  switch (exec) {
    case ExecMode::Train:
      if (policy.epsilon > 0.0 && rng.uniform() < policy.epsilon)
        return rng.uniform_int(static_cast<int>(out.size()));
      return argmax_index(out);
    case ExecMode::Sample: {
      std::vector<double> p = softmax_copy(out);
      return categorical_sample(p, rng);
    }
    case ExecMode::Greedy:
      return argmax_index(out);
  }
  return argmax_index(out);
}

Trajectory run_episode(const RolloutSpec& spec) {
  env::Env& e = *spec.env;
  int n = e.agent_count();
  int teams = e.team_count();
  if (static_cast<int>(spec.policies.size()) != n)
    throw InputShapeError("run_episode: one policy per agent required");
  if (static_cast<int>(spec.signal_rngs.size()) != teams)
    throw InputShapeError("run_episode: one signal stream per team required");
  if (static_cast<int>(spec.action_rngs.size()) != n)
    throw InputShapeError("run_episode: one action stream per agent required");

  Trajectory traj;
  traj.env_id = spec.env_id;
  if (spec.reset_env) e.reset(*spec.env_rng);

  traj.team_signals.resize(static_cast<size_t>(teams));
  for (int t = 0; t < teams; ++t) {
    int dz = 0;
    for (int a = 0; a < n; ++a)
      if (e.team_of(a) == t) dz = spec.policies[static_cast<size_t>(a)].signal_dim;
    traj.team_signals[static_cast<size_t>(t)] = sample_signal(dz, *spec.signal_rngs[static_cast<size_t>(t)]);
  }

  std::vector<double> hidden;
  while (!e.done()) {
    TrajStep step;
    step.obs.resize(static_cast<size_t>(n));
    step.actions.resize(static_cast<size_t>(n));
    if (spec.record_hiddens) step.hiddens.resize(static_cast<size_t>(n));
    env::JointAction joint;
    joint.actions.resize(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
      e.observe(a, step.obs[static_cast<size_t>(a)]);
      const Signal& z = traj.team_signals[static_cast<size_t>(e.team_of(a))];
      const PolicyHandle& ph = spec.policies[static_cast<size_t>(a)];
      int act = select_action(ph, step.obs[static_cast<size_t>(a)], z.values, spec.exec,
                              *spec.action_rngs[static_cast<size_t>(a)]);
      step.actions[static_cast<size_t>(a)] = act;
      joint.actions[static_cast<size_t>(a)] = act;
      if (spec.record_hiddens) {
        std::vector<double> in(step.obs[static_cast<size_t>(a)]);
        in.insert(in.end(), z.values.begin(), z.values.end());
        std::vector<double> out;
        ph.net->infer(in, out, &hidden);
        step.hiddens[static_cast<size_t>(a)] = hidden;
      }
    }
    env::StepResult res = e.step(joint);
    step.rewards = std::move(res.rewards);
    step.events = std::move(res.events);
    step.done = res.done;
    traj.steps.push_back(std::move(step));
    if (spec.on_step) {
      std::vector<std::vector<double>> next_obs(static_cast<size_t>(n));
      for (int a = 0; a < n; ++a) e.observe(a, next_obs[static_cast<size_t>(a)]);
      spec.on_step(traj, next_obs);
    }
  }

  traj.final_obs.resize(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) e.observe(a, traj.final_obs[static_cast<size_t>(a)]);
  return traj;
}

}  // namespace sic
