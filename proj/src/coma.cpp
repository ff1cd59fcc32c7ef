#include "sic/algo/coma.hpp"

#include "sic/algo/returns.hpp"
#include "sic/errors.hpp"

namespace sic {

ComaTrainer::ComaTrainer(TeamEnvView view, TrainParams params, std::string prefix,
                         const StreamFn& stream, PolicyMode mode)
    : TeamTrainer(std::move(view), std::move(params), std::move(prefix)), mode_(mode) {
  for (int i = 0; i < view_.size(); ++i) {
    MlpSpec aspec = make_mlp_spec(view_.obs_dim(i) + params_.dz, params_.policy_hidden,
                                  view_.n_actions(i), OutputActivation::Softmax);
    Rng& ainit = stream("init." + prefix_ + ".a" + std::to_string(i) + ".policy");
    actors_.push_back(std::make_unique<Mlp>(aspec, ainit));

    MlpSpec cspec = make_mlp_spec(critic_input_dim(i), params_.critic_hidden, view_.n_actions(i),
                                  OutputActivation::Identity);
    Rng& cinit = stream("init." + prefix_ + ".a" + std::to_string(i) + ".critic");
    critics_.push_back(std::make_unique<Mlp>(cspec, cinit));
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
}

int ComaTrainer::critic_input_dim(int local) const {
  int gi = view_.agents[static_cast<size_t>(local)];
  int d = view_.total_obs_dim() + view_.total_action_dim() -
          view_.all_n_actions[static_cast<size_t>(gi)];
  if (params_.critic_signal && params_.dz > 0) d += params_.dz;
  return d;
}

void ComaTrainer::build_critic_row(const TrajStep& s, std::span<const double> z, int gi,
                                   std::vector<double>& out) const {
  out.clear();
  for (const std::vector<double>& o : s.obs) out.insert(out.end(), o.begin(), o.end());
  for (int j = 0; j < static_cast<int>(s.actions.size()); ++j) {
    if (j == gi) continue;
    int k = view_.all_n_actions[static_cast<size_t>(j)];
    for (int c = 0; c < k; ++c)
      out.push_back(c == s.actions[static_cast<size_t>(j)] ? 1.0 : 0.0);
  }
  if (params_.critic_signal && params_.dz > 0) out.insert(out.end(), z.begin(), z.end());
}

std::vector<PolicyHandle> ComaTrainer::policy_handles() const {
  std::vector<PolicyHandle> out;
  for (const auto& a : actors_) out.push_back({a.get(), mode_, params_.dz, 0.0});
  return out;
}

void ComaTrainer::fill_sources(std::vector<NextActionSource>& all) const {
  for (int i = 0; i < view_.size(); ++i)
    all[static_cast<size_t>(view_.agents[static_cast<size_t>(i)])] =
        {actors_[static_cast<size_t>(i)].get(), mode_, false, params_.gumbel_tau, params_.dz,
         view_.team_id};
}

void ComaTrainer::visit_nets(const NetVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i) {
    fn(prefix_ + ".a" + std::to_string(i) + ".policy", *actors_[static_cast<size_t>(i)]);
    fn(prefix_ + ".a" + std::to_string(i) + ".critic", *critics_[static_cast<size_t>(i)]);
  }
  if (unet_) fn(prefix_ + ".unet", *unet_);
}

void ComaTrainer::visit_adam(const AdamVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i) {
    fn(prefix_ + ".a" + std::to_string(i) + ".policy", actor_opt_[static_cast<size_t>(i)]);
    fn(prefix_ + ".a" + std::to_string(i) + ".critic", critic_opt_[static_cast<size_t>(i)]);
  }
  if (unet_) fn(prefix_ + ".unet", unet_opt_);
}

void ComaTrainer::on_episode(const Trajectory& traj) {
  episodes_seen_ += 1;
  pending_.push_back(traj);
  if (total_steps(pending_) >= params_.batch_size) update();
}

void ComaTrainer::force_update() {
  if (!pending_.empty()) update();
}

void ComaTrainer::update() {
  if (mode_ != PolicyMode::StochasticSoftmax)
    throw ModeError("coma: policies must be stochastic");
  const int m = view_.size();
  const int n = static_cast<int>(total_steps(pending_));

  // Per-agent flattened batches, row order = (episode, step).
  std::vector<std::vector<double>> crows(static_cast<size_t>(m));   // critic inputs
  std::vector<std::vector<int>> taken(static_cast<size_t>(m));      // own actions
  std::vector<std::vector<double>> targets(static_cast<size_t>(m)); // lambda-returns
  std::vector<double> row(0);
  std::vector<double> in;
  std::vector<double> qout;
  std::vector<double> pout;
  double critic_loss = 0.0;

  for (int i = 0; i < m; ++i) {
    int gi = view_.agents[static_cast<size_t>(i)];
    crows[static_cast<size_t>(i)].reserve(static_cast<size_t>(n) *
                                          static_cast<size_t>(critic_input_dim(i)));
    for (const Trajectory& e : pending_) {
      const std::vector<double>& z = e.team_signals[static_cast<size_t>(view_.team_id)].values;
      std::vector<double> rew(static_cast<size_t>(e.length()));
      std::vector<double> values(static_cast<size_t>(e.length()) + 1, 0.0);
      for (int t = 0; t < e.length(); ++t) {
        const TrajStep& s = e.steps[static_cast<size_t>(t)];
        rew[static_cast<size_t>(t)] = s.rewards[static_cast<size_t>(gi)];
        build_critic_row(s, z, gi, row);
        crows[static_cast<size_t>(i)].insert(crows[static_cast<size_t>(i)].end(), row.begin(),
                                             row.end());
        taken[static_cast<size_t>(i)].push_back(s.actions[static_cast<size_t>(gi)]);

        critics_[static_cast<size_t>(i)]->infer(row, qout);
        in.assign(s.obs[static_cast<size_t>(gi)].begin(), s.obs[static_cast<size_t>(gi)].end());
        in.insert(in.end(), z.begin(), z.end());
        actors_[static_cast<size_t>(i)]->infer(in, pout);
        double v = 0.0;
        for (int c = 0; c < static_cast<int>(qout.size()); ++c)
          v += pout[static_cast<size_t>(c)] * qout[static_cast<size_t>(c)];
        values[static_cast<size_t>(t)] = v;
      }
      std::vector<double> adv = gae_advantages(rew, values, params_.gamma, params_.lambda);
      for (int t = 0; t < e.length(); ++t)
        targets[static_cast<size_t>(i)].push_back(adv[static_cast<size_t>(t)] +
                                                  values[static_cast<size_t>(t)]);
    }

    ad::Tape ct;
    ad::NodeId cin = ct.input(crows[static_cast<size_t>(i)], n, critic_input_dim(i));
    Mlp::Fwd cf = critics_[static_cast<size_t>(i)]->forward(ct, cin);
    ad::NodeId own = ct.gather_cols(cf.output, taken[static_cast<size_t>(i)]);
    ad::NodeId y = ct.input(targets[static_cast<size_t>(i)], n, 1);
    ad::NodeId loss = ct.mse(own, y);
    ct.backward(loss);
    std::vector<Tensor*> ptrs = critics_[static_cast<size_t>(i)]->param_ptrs();
    adam_step(ptrs, critic_opt_[static_cast<size_t>(i)], params_.critic_lr(), params_.clip_norm);
    critic_loss += ct.value(loss)[0];
  }

  // Actors, against the refreshed critics.
  ad::Tape tape;
  std::vector<ad::NodeId> hidden_nodes(static_cast<size_t>(m));
  std::vector<ad::NodeId> scalars;
  std::vector<double> coeffs;
  for (int i = 0; i < m; ++i) {
    int gi = view_.agents[static_cast<size_t>(i)];
    int k = view_.all_n_actions[static_cast<size_t>(gi)];
    int in_dim = view_.obs_dim(i) + params_.dz;
    std::vector<double> x;
    x.reserve(static_cast<size_t>(n) * static_cast<size_t>(in_dim));
    for (const Trajectory& e : pending_) {
      const std::vector<double>& z = e.team_signals[static_cast<size_t>(view_.team_id)].values;
      for (const TrajStep& s : e.steps) {
        const std::vector<double>& o = s.obs[static_cast<size_t>(gi)];
        x.insert(x.end(), o.begin(), o.end());
        x.insert(x.end(), z.begin(), z.end());
      }
    }
    ad::NodeId xin = tape.input(x, n, in_dim);
    Mlp::Fwd fwd = actors_[static_cast<size_t>(i)]->forward(tape, xin);
    hidden_nodes[static_cast<size_t>(i)] = fwd.hidden;

    std::span<const double> probs = tape.value(fwd.output);
    std::vector<double> adv(static_cast<size_t>(n));
    const std::vector<double>& ci = crows[static_cast<size_t>(i)];
    int cdim = critic_input_dim(i);
    for (int r = 0; r < n; ++r) {
      std::span<const double> crow(ci.data() + static_cast<size_t>(r) * cdim,
                                   static_cast<size_t>(cdim));
      critics_[static_cast<size_t>(i)]->infer(crow, qout);
      std::span<const double> prow(probs.data() + static_cast<size_t>(r) * k,
                                   static_cast<size_t>(k));
      adv[static_cast<size_t>(r)] =
          coma_advantage(qout, prow, taken[static_cast<size_t>(i)][static_cast<size_t>(r)]);
    }

    ad::NodeId lp = tape.log_op(tape.gather_cols(fwd.output, taken[static_cast<size_t>(i)]));
    ad::NodeId pg = tape.weighted_mean(lp, adv);
    scalars.push_back(pg);
    coeffs.push_back(-1.0);
  }

  ad::NodeId mi = -1;
  if (unet_ && params_.alpha != 0.0) {
    mi = episode_mi_node(tape, *unet_, view_, params_.dz, pending_, hidden_nodes);
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
    std::vector<ad::NodeId> hconst(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::span<const double> hv = tape.value(hidden_nodes[static_cast<size_t>(i)]);
      hconst[static_cast<size_t>(i)] =
          ut.input(hv, n, actors_[static_cast<size_t>(i)]->hidden_dim());
    }
    ad::NodeId mi2 = episode_mi_node(ut, *unet_, view_, params_.dz, pending_, hconst);
    ut.backward(mi2);
    std::vector<Tensor*> ptrs = unet_->param_ptrs();
    adam_step(ptrs, unet_opt_, params_.unet_lr(), params_.clip_norm);
    metrics_.mi_loss = ut.value(mi2)[0];
  }

  metrics_.policy_loss = ploss;
  metrics_.critic_loss = critic_loss / static_cast<double>(m);
  metrics_.updates += 1;
  pending_.clear();
}

}  // namespace sic
