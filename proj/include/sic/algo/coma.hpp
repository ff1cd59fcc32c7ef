#pragma once

#include "sic/algo/trainer.hpp"

namespace sic {

// Actor-critic trainer with counterfactual baselines. Every agent owns a
// stochastic softmax actor over (own obs, z) and a centralized critic mapping
// (all observations, the other agents' one-hot actions, z) to one value per
// own action. Updates run on whole-episode batches: critics first regress
// their taken-action value onto lambda-returns (GAE advantage plus value),
// then actors ascend counterfactual-advantage-weighted log-probabilities,
// sharing the signal-reconstruction term with the other trainers.
class ComaTrainer : public TeamTrainer {
 public:
  ComaTrainer(TeamEnvView view, TrainParams params, std::string prefix, const StreamFn& stream,
              PolicyMode mode = PolicyMode::StochasticSoftmax);

  std::vector<PolicyHandle> policy_handles() const override;
  void on_episode(const Trajectory& traj) override;
  void fill_sources(std::vector<NextActionSource>& all) const override;
  void visit_nets(const NetVisitor& fn) override;
  void visit_adam(const AdamVisitor& fn) override;
  std::vector<Trajectory>* mutable_pending() override { return &pending_; }

  Mlp& actor(int local) { return *actors_[static_cast<size_t>(local)]; }
  Mlp& critic(int local) { return *critics_[static_cast<size_t>(local)]; }
  Mlp* unet() { return unet_.get(); }
  int pending_episodes() const { return static_cast<int>(pending_.size()); }
  void force_update();

 private:
  int critic_input_dim(int local) const;
  void build_critic_row(const TrajStep& s, std::span<const double> z, int gi,
                        std::vector<double>& out) const;
  void update();

  PolicyMode mode_;
  std::vector<std::unique_ptr<Mlp>> actors_;
  std::vector<std::unique_ptr<Mlp>> critics_;
  std::unique_ptr<Mlp> unet_;
  std::vector<AdamState> actor_opt_;
  std::vector<AdamState> critic_opt_;
  AdamState unet_opt_;
  std::vector<Trajectory> pending_;
};

}  // namespace sic
