#include "sic/algo/maddpg.hpp"

#include <algorithm>

#include "sic/errors.hpp"
#include "sic/gumbel.hpp"

namespace sic {

MaddpgTrainer::MaddpgTrainer(TeamEnvView view, TrainParams params, std::string prefix,
                             const StreamFn& stream)
    : TeamTrainer(std::move(view), std::move(params), std::move(prefix)) {
  for (int i = 0; i < view_.size(); ++i) {
    MlpSpec aspec = make_mlp_spec(view_.obs_dim(i) + params_.dz, params_.policy_hidden,
                                  view_.n_actions(i), OutputActivation::Identity);
    Rng& ainit = stream("init." + prefix_ + ".a" + std::to_string(i) + ".policy");
    actors_.push_back(std::make_unique<Mlp>(aspec, ainit));
    target_actors_.push_back(std::make_unique<Mlp>(aspec, ainit));
    target_actors_.back()->copy_params_from(*actors_.back());

    MlpSpec cspec =
        make_mlp_spec(critic_input_dim(), params_.critic_hidden, 1, OutputActivation::Identity);
    Rng& cinit = stream("init." + prefix_ + ".a" + std::to_string(i) + ".critic");
    critics_.push_back(std::make_unique<Mlp>(cspec, cinit));
    target_critics_.push_back(std::make_unique<Mlp>(cspec, cinit));
    target_critics_.back()->copy_params_from(*critics_.back());
  }
  actor_opt_.resize(actors_.size());
  critic_opt_.resize(critics_.size());
  if (params_.dz > 0) {
    int hsum = 0;
    for (const auto& a : actors_) hsum += a->hidden_dim();
    MlpSpec uspec = make_mlp_spec(view_.team_obs_dim() + hsum, params_.unet_hidden, params_.dz,
                                  OutputActivation::Identity);
    Rng& init = stream("init." + prefix_ + ".unet");
    unet_ = std::make_unique<Mlp>(uspec, init);
  }
  update_rng_ = &stream("update." + prefix_);
  buffer_rng_ = &stream("buffer." + prefix_);
}

int MaddpgTrainer::critic_input_dim() const {
  int d = view_.total_obs_dim() + view_.total_action_dim();
  if (params_.critic_signal && params_.dz > 0) d += params_.dz;
  return d;
}

double MaddpgTrainer::current_epsilon() const {
  return epsilon_schedule(params_.eps_start, params_.eps_end, episodes_seen_,
                          params_.total_episodes);
}

std::vector<PolicyHandle> MaddpgTrainer::policy_handles() const {
  std::vector<PolicyHandle> out;
  double eps = current_epsilon();
  for (const auto& a : actors_)
    out.push_back({a.get(), PolicyMode::DeterministicGumbel, params_.dz, eps});
  return out;
}

void MaddpgTrainer::fill_sources(std::vector<NextActionSource>& all) const {
  for (int i = 0; i < view_.size(); ++i)
    all[static_cast<size_t>(view_.agents[static_cast<size_t>(i)])] =
        {target_actors_[static_cast<size_t>(i)].get(), PolicyMode::DeterministicGumbel, true,
         params_.gumbel_tau, params_.dz, view_.team_id};
}

void MaddpgTrainer::visit_nets(const NetVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i) {
    std::string base = prefix_ + ".a" + std::to_string(i);
    fn(base + ".policy", *actors_[static_cast<size_t>(i)]);
    fn(base + ".critic", *critics_[static_cast<size_t>(i)]);
    fn(base + ".target_policy", *target_actors_[static_cast<size_t>(i)]);
    fn(base + ".target_critic", *target_critics_[static_cast<size_t>(i)]);
  }
  if (unet_) fn(prefix_ + ".unet", *unet_);
}

void MaddpgTrainer::visit_adam(const AdamVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i) {
    std::string base = prefix_ + ".a" + std::to_string(i);
    fn(base + ".policy", actor_opt_[static_cast<size_t>(i)]);
    fn(base + ".critic", critic_opt_[static_cast<size_t>(i)]);
  }
  if (unet_) fn(prefix_ + ".unet", unet_opt_);
}

void MaddpgTrainer::visit_counters(const CounterVisitor& fn) {
  TeamTrainer::visit_counters(fn);
  fn(prefix_ + ".steps_since_update", steps_since_update_);
}

void MaddpgTrainer::on_transition(const ReplayBuffer& buffer,
                                  const std::vector<NextActionSource>& sources) {
  steps_since_update_ += 1;
  int needed = std::max(params_.warmup, params_.batch_size);
  if (buffer.size() < needed) return;
  if (steps_since_update_ < params_.update_every) return;
  update_round(buffer, sources);
  steps_since_update_ = 0;
}

void MaddpgTrainer::update_round(const ReplayBuffer& buffer,
                                 const std::vector<NextActionSource>& sources) {
  const int b = params_.batch_size;
  const int n_agents = static_cast<int>(view_.all_obs_dims.size());
  const int m = view_.size();
  if (static_cast<int>(sources.size()) != n_agents)
    throw InputShapeError("maddpg: one next-action source per agent required");
  std::vector<int> idx = buffer.sample_indices(b, *buffer_rng_);

  // Flattened column blocks over the batch, in global agent order.
  std::vector<std::vector<double>> obs(static_cast<size_t>(n_agents));
  std::vector<std::vector<double>> onehot(static_cast<size_t>(n_agents));
  std::vector<std::vector<double>> relaxed_next(static_cast<size_t>(n_agents));
  std::vector<double> zrows;
  std::vector<double> dones(static_cast<size_t>(b));
  for (int j = 0; j < n_agents; ++j) {
    obs[static_cast<size_t>(j)].reserve(static_cast<size_t>(b) *
                                        static_cast<size_t>(view_.all_obs_dims[static_cast<size_t>(j)]));
    onehot[static_cast<size_t>(j)].reserve(static_cast<size_t>(b) *
                                           static_cast<size_t>(view_.all_n_actions[static_cast<size_t>(j)]));
  }
  for (int r = 0; r < b; ++r) {
    const Transition& tr = buffer.at(idx[static_cast<size_t>(r)]);
    dones[static_cast<size_t>(r)] = tr.done ? 1.0 : 0.0;
    for (int j = 0; j < n_agents; ++j) {
      const std::vector<double>& o = tr.obs[static_cast<size_t>(j)];
      obs[static_cast<size_t>(j)].insert(obs[static_cast<size_t>(j)].end(), o.begin(), o.end());
      int k = view_.all_n_actions[static_cast<size_t>(j)];
      for (int c = 0; c < k; ++c)
        onehot[static_cast<size_t>(j)].push_back(c == tr.actions[static_cast<size_t>(j)] ? 1.0
                                                                                         : 0.0);
    }
    const std::vector<double>& z = tr.team_signals[static_cast<size_t>(view_.team_id)];
    zrows.insert(zrows.end(), z.begin(), z.end());
  }

  // Relaxed next actions from every agent's target (or frozen) policy; the
  // noise for trained agents comes from this team's own update stream so no
  // other team's stream is perturbed.
  std::vector<double> in;
  std::vector<double> out;
  for (int j = 0; j < n_agents; ++j) {
    const NextActionSource& src = sources[static_cast<size_t>(j)];
    if (!src.net) throw ParameterError("maddpg: missing next-action source");
    int k = view_.all_n_actions[static_cast<size_t>(j)];
    relaxed_next[static_cast<size_t>(j)].reserve(static_cast<size_t>(b) * static_cast<size_t>(k));
    for (int r = 0; r < b; ++r) {
      const Transition& tr = buffer.at(idx[static_cast<size_t>(r)]);
      const std::vector<double>& o = tr.next_obs[static_cast<size_t>(j)];
      const std::vector<double>& z = tr.team_signals[static_cast<size_t>(src.team)];
      in.assign(o.begin(), o.end());
      in.insert(in.end(), z.begin(), z.end());
      src.net->infer(in, out);
      std::vector<double> relaxed;
      if (src.mode == PolicyMode::StochasticSoftmax) {
        relaxed.assign(out.begin(), out.end());
      } else if (src.noisy) {
        relaxed = gumbel_softmax_sample(out, src.tau, *update_rng_);
      } else {
        relaxed = relaxed_softmax(out, src.tau);
      }
      relaxed_next[static_cast<size_t>(j)].insert(relaxed_next[static_cast<size_t>(j)].end(),
                                                  relaxed.begin(), relaxed.end());
    }
  }

  const int cdim = critic_input_dim();
  const bool with_z = params_.critic_signal && params_.dz > 0;

  // Critic regression toward r + gamma * (1 - done) * target_Q(next).
  double critic_loss = 0.0;
  std::vector<double> crow(static_cast<size_t>(cdim));
  for (int i = 0; i < m; ++i) {
    int gi = view_.agents[static_cast<size_t>(i)];
    std::vector<double> targets(static_cast<size_t>(b));
    for (int r = 0; r < b; ++r) {
      crow.clear();
      const Transition& tr = buffer.at(idx[static_cast<size_t>(r)]);
      for (int j = 0; j < n_agents; ++j) {
        const std::vector<double>& o = tr.next_obs[static_cast<size_t>(j)];
        crow.insert(crow.end(), o.begin(), o.end());
      }
      for (int j = 0; j < n_agents; ++j) {
        int k = view_.all_n_actions[static_cast<size_t>(j)];
        const double* a =
            relaxed_next[static_cast<size_t>(j)].data() + static_cast<size_t>(r) * k;
        crow.insert(crow.end(), a, a + k);
      }
      if (with_z) {
        const std::vector<double>& z = tr.team_signals[static_cast<size_t>(view_.team_id)];
        crow.insert(crow.end(), z.begin(), z.end());
      }
      target_critics_[static_cast<size_t>(i)]->infer(crow, out);
      targets[static_cast<size_t>(r)] =
          tr.rewards[static_cast<size_t>(gi)] +
          params_.gamma * (1.0 - dones[static_cast<size_t>(r)]) * out[0];
    }

    std::vector<double> cin;
    cin.reserve(static_cast<size_t>(b) * static_cast<size_t>(cdim));
    for (int r = 0; r < b; ++r) {
      for (int j = 0; j < n_agents; ++j) {
        const double* o = obs[static_cast<size_t>(j)].data() +
                          static_cast<size_t>(r) * view_.all_obs_dims[static_cast<size_t>(j)];
        cin.insert(cin.end(), o, o + view_.all_obs_dims[static_cast<size_t>(j)]);
      }
      for (int j = 0; j < n_agents; ++j) {
        int k = view_.all_n_actions[static_cast<size_t>(j)];
        const double* a = onehot[static_cast<size_t>(j)].data() + static_cast<size_t>(r) * k;
        cin.insert(cin.end(), a, a + k);
      }
      if (with_z)
        cin.insert(cin.end(), zrows.begin() + static_cast<size_t>(r) * params_.dz,
                   zrows.begin() + static_cast<size_t>(r + 1) * params_.dz);
    }
    ad::Tape ct;
    ad::NodeId cnode = ct.input(cin, b, cdim);
    Mlp::Fwd cf = critics_[static_cast<size_t>(i)]->forward(ct, cnode);
    ad::NodeId y = ct.input(targets, b, 1);
    ad::NodeId loss = ct.mse(cf.output, y);
    ct.backward(loss);
    std::vector<Tensor*> ptrs = critics_[static_cast<size_t>(i)]->param_ptrs();
    adam_step(ptrs, critic_opt_[static_cast<size_t>(i)], params_.critic_lr(), params_.clip_norm);
    critic_loss += ct.value(loss)[0];
  }

  // Actors: ascend own critic with own action relaxed, everything else from
  // the batch; the MI term sees the actors' hidden activations.
  ad::Tape tape;
  std::vector<ad::NodeId> obs_nodes(static_cast<size_t>(n_agents));
  std::vector<ad::NodeId> act_nodes(static_cast<size_t>(n_agents));
  for (int j = 0; j < n_agents; ++j) {
    obs_nodes[static_cast<size_t>(j)] = tape.input(
        obs[static_cast<size_t>(j)], b, view_.all_obs_dims[static_cast<size_t>(j)]);
    act_nodes[static_cast<size_t>(j)] = tape.input(
        onehot[static_cast<size_t>(j)], b, view_.all_n_actions[static_cast<size_t>(j)]);
  }
  ad::NodeId znode = -1;
  if (with_z) znode = tape.input(zrows, b, params_.dz);

  std::vector<ad::NodeId> hidden_nodes(static_cast<size_t>(m));
  std::vector<ad::NodeId> scalars;
  std::vector<double> coeffs;
  std::vector<double> noise;
  for (int i = 0; i < m; ++i) {
    int gi = view_.agents[static_cast<size_t>(i)];
    int k = view_.all_n_actions[static_cast<size_t>(gi)];
    std::vector<double> x;
    x.reserve(static_cast<size_t>(b) *
              static_cast<size_t>(view_.obs_dim(i) + params_.dz));
    for (int r = 0; r < b; ++r) {
      const double* o = obs[static_cast<size_t>(gi)].data() +
                        static_cast<size_t>(r) * view_.all_obs_dims[static_cast<size_t>(gi)];
      x.insert(x.end(), o, o + view_.all_obs_dims[static_cast<size_t>(gi)]);
      if (params_.dz > 0)
        x.insert(x.end(), zrows.begin() + static_cast<size_t>(r) * params_.dz,
                 zrows.begin() + static_cast<size_t>(r + 1) * params_.dz);
    }
    ad::NodeId xin = tape.input(x, b, view_.obs_dim(i) + params_.dz);
    Mlp::Fwd fwd = actors_[static_cast<size_t>(i)]->forward(tape, xin);
    hidden_nodes[static_cast<size_t>(i)] = fwd.hidden;

    noise.resize(static_cast<size_t>(b) * static_cast<size_t>(k));
    for (double& g : noise) g = gumbel_noise(*update_rng_);
    ad::NodeId own = gumbel_softmax_node(tape, fwd.output, noise, params_.gumbel_tau);

    std::vector<ad::NodeId> parts;
    for (int j = 0; j < n_agents; ++j) parts.push_back(obs_nodes[static_cast<size_t>(j)]);
    for (int j = 0; j < n_agents; ++j)
      parts.push_back(j == gi ? own : act_nodes[static_cast<size_t>(j)]);
    if (with_z) parts.push_back(znode);
    ad::NodeId cin = tape.concat_cols(parts);
    Mlp::Fwd cf = critics_[static_cast<size_t>(i)]->forward(tape, cin);
    ad::NodeId q = tape.mean_all(cf.output);
    scalars.push_back(q);
    coeffs.push_back(-1.0);
  }

  ad::NodeId mi = -1;
  if (unet_ && params_.alpha != 0.0) {
    std::vector<double> state;
    state.reserve(static_cast<size_t>(b) * static_cast<size_t>(view_.team_obs_dim()));
    for (int r = 0; r < b; ++r)
      for (int a : view_.agents) {
        const double* o = obs[static_cast<size_t>(a)].data() +
                          static_cast<size_t>(r) * view_.all_obs_dims[static_cast<size_t>(a)];
        state.insert(state.end(), o, o + view_.all_obs_dims[static_cast<size_t>(a)]);
      }
    ad::NodeId snode = tape.input(state, b, view_.team_obs_dim());
    ad::NodeId recon = unet_reconstruct(tape, *unet_, snode, hidden_nodes);
    mi = mi_loss_node(tape, recon, zrows);
    scalars.push_back(mi);
    coeffs.push_back(params_.alpha);
  }
  ad::NodeId loss = tape.add_scalars(scalars, coeffs);
  tape.backward(loss);

  double ploss = 0.0;
  for (int i = 0; i < m; ++i) ploss -= tape.value(scalars[static_cast<size_t>(i)])[0];
  for (int i = 0; i < m; ++i) {
    std::vector<Tensor*> ptrs = actors_[static_cast<size_t>(i)]->param_ptrs();
    adam_step(ptrs, actor_opt_[static_cast<size_t>(i)], params_.lr, params_.clip_norm);
  }
  if (unet_ && params_.alpha != 0.0) {
    std::vector<Tensor*> ptrs = unet_->param_ptrs();
    adam_step(ptrs, unet_opt_, params_.unet_lr(), params_.clip_norm);
    metrics_.mi_loss = tape.value(mi)[0];
  }
  if (unet_ && params_.alpha == 0.0) {
    ad::Tape ut;
    std::vector<double> state;
    state.reserve(static_cast<size_t>(b) * static_cast<size_t>(view_.team_obs_dim()));
    for (int r = 0; r < b; ++r)
      for (int a : view_.agents) {
        const double* o = obs[static_cast<size_t>(a)].data() +
                          static_cast<size_t>(r) * view_.all_obs_dims[static_cast<size_t>(a)];
        state.insert(state.end(), o, o + view_.all_obs_dims[static_cast<size_t>(a)]);
      }
    ad::NodeId snode = ut.input(state, b, view_.team_obs_dim());
    std::vector<ad::NodeId> hconst(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::span<const double> hv = tape.value(hidden_nodes[static_cast<size_t>(i)]);
      hconst[static_cast<size_t>(i)] =
          ut.input(hv, b, actors_[static_cast<size_t>(i)]->hidden_dim());
    }
    ad::NodeId recon = unet_reconstruct(ut, *unet_, snode, hconst);
    ad::NodeId mi2 = mi_loss_node(ut, recon, zrows);
    ut.backward(mi2);
    std::vector<Tensor*> ptrs = unet_->param_ptrs();
    adam_step(ptrs, unet_opt_, params_.unet_lr(), params_.clip_norm);
    metrics_.mi_loss = ut.value(mi2)[0];
  }

  for (int i = 0; i < m; ++i) {
    target_actors_[static_cast<size_t>(i)]->soft_update_from(*actors_[static_cast<size_t>(i)],
                                                             params_.target_rate);
    target_critics_[static_cast<size_t>(i)]->soft_update_from(*critics_[static_cast<size_t>(i)],
                                                              params_.target_rate);
  }

  metrics_.policy_loss = ploss;
  metrics_.critic_loss = critic_loss / static_cast<double>(m);
  metrics_.updates += 1;
}

}  // namespace sic
