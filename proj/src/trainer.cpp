#include "sic/algo/trainer.hpp"

namespace sic {

double epsilon_schedule(double eps_start, double eps_end, long long episode, long long total) {
  long long half = total / 2;
  if (half < 1) half = 1;
  if (episode >= half) return eps_end;
  double frac = static_cast<double>(episode) / static_cast<double>(half);
  return eps_start + (eps_end - eps_start) * frac;
}

long long total_steps(const std::vector<Trajectory>& trajs) {
  long long n = 0;
  for (const auto& t : trajs) n += t.length();
  return n;
}

MlpSpec make_mlp_spec(int in, const std::vector<int>& hidden, int out, OutputActivation oa) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return MlpSpec(std::move(sizes), Activation::ReLU, oa);
}

ad::NodeId episode_mi_node(ad::Tape& tape, Mlp& unet, const TeamEnvView& view, int dz,
                           const std::vector<Trajectory>& episodes,
                           std::span<const ad::NodeId> hiddens) {
  int n = static_cast<int>(total_steps(episodes));
  int sdim = view.team_obs_dim();
  std::vector<double> state;
  state.reserve(static_cast<size_t>(n) * static_cast<size_t>(sdim));
  std::vector<double> zrows;
  zrows.reserve(static_cast<size_t>(n) * static_cast<size_t>(dz));
  for (const Trajectory& e : episodes) {
    const std::vector<double>& z = e.team_signals[static_cast<size_t>(view.team_id)].values;
    for (const TrajStep& s : e.steps) {
      for (int a : view.agents) {
        const std::vector<double>& o = s.obs[static_cast<size_t>(a)];
        state.insert(state.end(), o.begin(), o.end());
      }
      zrows.insert(zrows.end(), z.begin(), z.end());
    }
  }
  ad::NodeId snode = tape.input(state, n, sdim);
  ad::NodeId recon = unet_reconstruct(tape, unet, snode, hiddens);
  return mi_loss_node(tape, recon, zrows);
}

}  // namespace sic
