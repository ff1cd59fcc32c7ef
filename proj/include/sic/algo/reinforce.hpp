#pragma once

#include "sic/algo/trainer.hpp"

namespace sic {

// Policy-gradient trainer for one team of stochastic softmax policies.
// Whole episodes accumulate until batch_size transitions are buffered, then
// one ascent step is taken on
//     sum_i mean_t[ G_t * log pi_i(a_t | o_t, z) ]  -  alpha * L_I
// with per-network Adam. D_z = 0 builds no reconstruction net and feeds no
// signal anywhere, which is exactly the independent-learner path; alpha = 0
// with D_z > 0 keeps the signal input but trains the reconstruction net on a
// detached graph so no MI gradient reaches the policies.
class ReinforceTrainer : public TeamTrainer {
 public:
  ReinforceTrainer(TeamEnvView view, TrainParams params, std::string prefix,
                   const StreamFn& stream, PolicyMode mode = PolicyMode::StochasticSoftmax);

  std::vector<PolicyHandle> policy_handles() const override;
  void on_episode(const Trajectory& traj) override;
  void fill_sources(std::vector<NextActionSource>& all) const override;
  void visit_nets(const NetVisitor& fn) override;
  void visit_adam(const AdamVisitor& fn) override;
  std::vector<Trajectory>* mutable_pending() override { return &pending_; }

  Mlp& policy(int local) { return *policies_[static_cast<size_t>(local)]; }
  Mlp* unet() { return unet_.get(); }  // null when D_z = 0
  int pending_episodes() const { return static_cast<int>(pending_.size()); }
  // Consumes whatever is pending immediately (tests and end-of-run flushes).
  void force_update();

 private:
  void update();

  PolicyMode mode_;
  std::vector<std::unique_ptr<Mlp>> policies_;
  std::unique_ptr<Mlp> unet_;
  std::vector<AdamState> policy_opt_;
  AdamState unet_opt_;
  std::vector<Trajectory> pending_;
};

}  // namespace sic
