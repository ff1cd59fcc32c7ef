#include "sic/algo/reinforce.hpp"

#include "sic/algo/returns.hpp"
#include "sic/errors.hpp"

namespace sic {

ReinforceTrainer::ReinforceTrainer(TeamEnvView view, TrainParams params, std::string prefix,
                                   const StreamFn& stream, PolicyMode mode)
    : TeamTrainer(std::move(view), std::move(params), std::move(prefix)), mode_(mode) {
  for (int i = 0; i < view_.size(); ++i) {
    MlpSpec spec = make_mlp_spec(view_.obs_dim(i) + params_.dz, params_.policy_hidden,
                                 view_.n_actions(i), OutputActivation::Softmax);
    Rng& init = stream("init." + prefix_ + ".a" + std::to_string(i) + ".policy");
    policies_.push_back(std::make_unique<Mlp>(spec, init));
  }
  policy_opt_.resize(policies_.size());
  if (params_.dz > 0) {
    int hsum = 0;
    for (const auto& p : policies_) hsum += p->hidden_dim();
    MlpSpec uspec = make_mlp_spec(view_.team_obs_dim() + hsum, params_.unet_hidden, params_.dz,
                                  OutputActivation::Identity);
    Rng& init = stream("init." + prefix_ + ".unet");
    unet_ = std::make_unique<Mlp>(uspec, init);
  }
}

std::vector<PolicyHandle> ReinforceTrainer::policy_handles() const {
  std::vector<PolicyHandle> out;
  for (const auto& p : policies_) out.push_back({p.get(), mode_, params_.dz, 0.0});
  return out;
}

void ReinforceTrainer::fill_sources(std::vector<NextActionSource>& all) const {
  for (int i = 0; i < view_.size(); ++i)
    all[static_cast<size_t>(view_.agents[static_cast<size_t>(i)])] =
        {policies_[static_cast<size_t>(i)].get(), mode_, false, params_.gumbel_tau, params_.dz,
         view_.team_id};
}

void ReinforceTrainer::visit_nets(const NetVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i)
    fn(prefix_ + ".a" + std::to_string(i) + ".policy", *policies_[static_cast<size_t>(i)]);
  if (unet_) fn(prefix_ + ".unet", *unet_);
}

void ReinforceTrainer::visit_adam(const AdamVisitor& fn) {
  for (int i = 0; i < view_.size(); ++i)
    fn(prefix_ + ".a" + std::to_string(i) + ".policy", policy_opt_[static_cast<size_t>(i)]);
  if (unet_) fn(prefix_ + ".unet", unet_opt_);
}

void ReinforceTrainer::on_episode(const Trajectory& traj) {
  episodes_seen_ += 1;
  pending_.push_back(traj);
  if (total_steps(pending_) >= params_.batch_size) update();
}

void ReinforceTrainer::force_update() {
  if (!pending_.empty()) update();
}

void ReinforceTrainer::update() {
  if (mode_ != PolicyMode::StochasticSoftmax)
    throw ModeError("reinforce: policies must be stochastic");
  const int m = view_.size();
  const int n = static_cast<int>(total_steps(pending_));

  ad::Tape tape;
  std::vector<ad::NodeId> hidden_nodes(static_cast<size_t>(m));
  std::vector<ad::NodeId> scalars;
  std::vector<double> coeffs;
  for (int i = 0; i < m; ++i) {
    int gi = view_.agents[static_cast<size_t>(i)];
    int in_dim = view_.obs_dim(i) + params_.dz;
    std::vector<double> x;
    x.reserve(static_cast<size_t>(n) * static_cast<size_t>(in_dim));
    std::vector<int> acts;
    acts.reserve(static_cast<size_t>(n));
    std::vector<double> weights;
    weights.reserve(static_cast<size_t>(n));
    for (const Trajectory& e : pending_) {
      const std::vector<double>& z = e.team_signals[static_cast<size_t>(view_.team_id)].values;
      std::vector<double> rew(static_cast<size_t>(e.length()));
      for (int t = 0; t < e.length(); ++t)
        rew[static_cast<size_t>(t)] = e.steps[static_cast<size_t>(t)].rewards[static_cast<size_t>(gi)];
      std::vector<double> ret = discounted_returns(rew, params_.gamma);
      for (int t = 0; t < e.length(); ++t) {
        const TrajStep& s = e.steps[static_cast<size_t>(t)];
        const std::vector<double>& o = s.obs[static_cast<size_t>(gi)];
        x.insert(x.end(), o.begin(), o.end());
        x.insert(x.end(), z.begin(), z.end());
        acts.push_back(s.actions[static_cast<size_t>(gi)]);
        weights.push_back(ret[static_cast<size_t>(t)]);
      }
    }
    ad::NodeId xin = tape.input(x, n, in_dim);
    Mlp::Fwd fwd = policies_[static_cast<size_t>(i)]->forward(tape, xin);
    hidden_nodes[static_cast<size_t>(i)] = fwd.hidden;
    ad::NodeId lp = tape.log_op(tape.gather_cols(fwd.output, acts));
    ad::NodeId pg = tape.weighted_mean(lp, weights);
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
    std::vector<Tensor*> ptrs = policies_[static_cast<size_t>(i)]->param_ptrs();
    adam_step(ptrs, policy_opt_[static_cast<size_t>(i)], params_.lr, params_.clip_norm);
  }
  if (unet_ && params_.alpha != 0.0) {
    std::vector<Tensor*> ptrs = unet_->param_ptrs();
    adam_step(ptrs, unet_opt_, params_.unet_lr(), params_.clip_norm);
    metrics_.mi_loss = tape.value(mi)[0];
  }

  if (unet_ && params_.alpha == 0.0) {
    // No MI gradient may touch the policies: rebuild the reconstruction graph
    // with the hidden activations frozen to constants.
    ad::Tape ut;
    std::vector<ad::NodeId> hconst(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::span<const double> hv = tape.value(hidden_nodes[static_cast<size_t>(i)]);
      hconst[static_cast<size_t>(i)] =
          ut.input(hv, n, policies_[static_cast<size_t>(i)]->hidden_dim());
    }
    ad::NodeId mi2 = episode_mi_node(ut, *unet_, view_, params_.dz, pending_, hconst);
    ut.backward(mi2);
    std::vector<Tensor*> ptrs = unet_->param_ptrs();
    adam_step(ptrs, unet_opt_, params_.unet_lr(), params_.clip_norm);
    metrics_.mi_loss = ut.value(mi2)[0];
  }

  metrics_.policy_loss = ploss;
  metrics_.updates += 1;
  pending_.clear();
}

}  // namespace sic
