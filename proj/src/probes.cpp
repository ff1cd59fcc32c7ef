#include "sic/eval/probes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sic/algo/rollout.hpp"
#include "sic/errors.hpp"

namespace sic {

namespace {

PolicyHandle handle_for(const Mlp* net, int dz) {
  PolicyMode mode = net->spec().output_activation == OutputActivation::Softmax
                        ? PolicyMode::StochasticSoftmax
                        : PolicyMode::DeterministicGumbel;
  return {net, mode, dz, 0.0};
}

void check_team_inputs(const std::vector<const Mlp*>& policies,
                       const std::vector<std::vector<double>>& member_obs,
                       const std::vector<int>& n_actions) {
  if (policies.empty() || policies.size() != member_obs.size() ||
      policies.size() != n_actions.size())
    throw ParameterError("probe: policies, observations, and action counts must align");
  for (const Mlp* p : policies)
    if (!p) throw ParameterError("probe: null policy");
  for (int k : n_actions)
    if (k < 1) throw ParameterError("probe: action count must be >= 1");
}

}  // namespace

PartitionProbe probe_signal_partition(const std::vector<const Mlp*>& policies,
                                      const std::vector<std::vector<double>>& member_obs,
                                      const std::vector<int>& n_actions, int dz, int n_signals,
                                      Rng& rng, bool greedy) {
  check_team_inputs(policies, member_obs, n_actions);
  if (dz < 1) throw ConfigError("probe_signal_partition: needs a signal dimension >= 1");
  if (n_signals < 1) throw ParameterError("probe_signal_partition: n_signals must be >= 1");

  int joint_count = 1;
  for (int k : n_actions) joint_count *= k;

  PartitionProbe out;
  out.signals.reserve(static_cast<size_t>(n_signals));
  out.joint_actions.reserve(static_cast<size_t>(n_signals));
  std::vector<long long> counts(static_cast<size_t>(joint_count), 0);
  ExecMode exec = greedy ? ExecMode::Greedy : ExecMode::Sample;

  for (int s = 0; s < n_signals; ++s) {
    std::vector<double> z(static_cast<size_t>(dz));
    for (double& v : z) v = rng.normal();
    int joint = 0;
    for (size_t m = 0; m < policies.size(); ++m) {
      int a = select_action(handle_for(policies[m], dz), member_obs[m], z, exec, rng);
      joint = joint * n_actions[m] + a;
    }
    counts[static_cast<size_t>(joint)] += 1;
    out.signals.push_back(std::move(z));
    out.joint_actions.push_back(joint);
  }

  out.frequencies.resize(static_cast<size_t>(joint_count));
  for (int j = 0; j < joint_count; ++j)
    out.frequencies[static_cast<size_t>(j)] =
        static_cast<double>(counts[static_cast<size_t>(j)]) / static_cast<double>(n_signals);
  return out;
}

JointDistribution joint_policy_frequencies(const std::vector<const Mlp*>& policies,
                                           const std::vector<std::vector<double>>& member_obs,
                                           const std::vector<int>& n_actions, int dz,
                                           int n_samples, Rng& rng) {
  check_team_inputs(policies, member_obs, n_actions);
  if (policies.size() != 2)
    throw ParameterError("joint_policy_frequencies: exactly two team members expected");
  if (dz < 0) throw ParameterError("joint_policy_frequencies: negative signal dimension");
  if (n_samples < 1) throw ParameterError("joint_policy_frequencies: n_samples must be >= 1");

  JointDistribution d;
  d.rows = n_actions[0];
  d.cols = n_actions[1];
  d.sample_count = n_samples;
  std::vector<long long> counts(static_cast<size_t>(d.rows * d.cols), 0);

  for (int s = 0; s < n_samples; ++s) {
    std::vector<double> z(static_cast<size_t>(dz));
    for (double& v : z) v = rng.normal();
    int a0 = select_action(handle_for(policies[0], dz), member_obs[0], z, ExecMode::Sample, rng);
    int a1 = select_action(handle_for(policies[1], dz), member_obs[1], z, ExecMode::Sample, rng);
    counts[static_cast<size_t>(a0 * d.cols + a1)] += 1;
  }

  d.probs.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i)
    d.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(n_samples);
  return d;
}

double mutual_information_zbins(const std::vector<std::vector<double>>& signals,
                                const std::vector<int>& actions, int n_action_values,
                                int bins_per_dim) {
  const size_t n = signals.size();
  if (n == 0 || actions.size() != n)
    throw ParameterError("mutual_information_zbins: signals and actions must align");
  if (n_action_values < 1 || bins_per_dim < 1)
    throw ParameterError("mutual_information_zbins: counts must be >= 1");
  const size_t dims = signals[0].size();
  if (dims == 0) throw ParameterError("mutual_information_zbins: empty signals");
  for (const auto& z : signals)
    if (z.size() != dims) throw ParameterError("mutual_information_zbins: ragged signals");
  for (int a : actions)
    if (a < 0 || a >= n_action_values)
      throw ParameterError("mutual_information_zbins: action out of range");

  // equal-count quantile edges per dimension
  std::vector<std::vector<double>> edges(dims);
  std::vector<double> column(n);
  for (size_t d = 0; d < dims; ++d) {
    for (size_t i = 0; i < n; ++i) column[i] = signals[i][d];
    std::sort(column.begin(), column.end());
    for (int k = 1; k < bins_per_dim; ++k)
      edges[d].push_back(column[static_cast<size_t>(k) * n / static_cast<size_t>(bins_per_dim)]);
  }

  std::map<std::vector<int>, std::vector<long long>> cells;
  std::vector<long long> action_counts(static_cast<size_t>(n_action_values), 0);
  std::vector<int> key(dims);
  for (size_t i = 0; i < n; ++i) {
    for (size_t d = 0; d < dims; ++d) {
      const auto& e = edges[d];
      key[d] = static_cast<int>(std::upper_bound(e.begin(), e.end(), signals[i][d]) - e.begin());
    }
    auto& row = cells[key];
    if (row.empty()) row.assign(static_cast<size_t>(n_action_values), 0);
    row[static_cast<size_t>(actions[i])] += 1;
    action_counts[static_cast<size_t>(actions[i])] += 1;
  }

  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (const auto& kv : cells) {
    long long cell_total = 0;
    for (long long c : kv.second) cell_total += c;
    for (int a = 0; a < n_action_values; ++a) {
      long long c = kv.second[static_cast<size_t>(a)];
      if (c == 0) continue;
      double p_joint = static_cast<double>(c) / dn;
      double p_cell = static_cast<double>(cell_total) / dn;
      double p_act = static_cast<double>(action_counts[static_cast<size_t>(a)]) / dn;
      mi += p_joint * std::log(p_joint / (p_cell * p_act));
    }
  }
  return mi;
}

ReconstructionCheck reconstruction_mse(const Mlp& unet, const TeamEnvView& view,
                                       const std::vector<Trajectory>& episodes) {
  if (episodes.empty()) throw ParameterError("reconstruction_mse: no episodes");

  double se = 0.0;
  double base = 0.0;
  long long rows = 0;
  std::vector<double> input;
  std::vector<double> zprime;
  for (const Trajectory& e : episodes) {
    const std::vector<double>& z =
        e.team_signals[static_cast<size_t>(view.team_id)].values;
    if (z.empty()) throw ParameterError("reconstruction_mse: episode carries no signal");
    for (const TrajStep& s : e.steps) {
      input.clear();
      for (int a : view.agents) {
        const auto& o = s.obs[static_cast<size_t>(a)];
        input.insert(input.end(), o.begin(), o.end());
      }
      for (int a : view.agents) {
        if (s.hiddens.empty() || s.hiddens[static_cast<size_t>(a)].empty())
          throw ParameterError("reconstruction_mse: episode lacks recorded hidden vectors");
        const auto& h = s.hiddens[static_cast<size_t>(a)];
        input.insert(input.end(), h.begin(), h.end());
      }
      unet.infer(input, zprime);
      double row_se = 0.0, row_base = 0.0;
      for (size_t c = 0; c < z.size(); ++c) {
        double d = zprime[c] - z[c];
        row_se += d * d;
        row_base += z[c] * z[c];
      }
      se += row_se / static_cast<double>(z.size());
      base += row_base / static_cast<double>(z.size());
      rows += 1;
    }
  }
  if (rows == 0) throw ParameterError("reconstruction_mse: episodes contain no steps");
  return {se / static_cast<double>(rows), base / static_cast<double>(rows)};
}

}  // namespace sic
