#pragma once

#include "sic/algo/trainer.hpp"

namespace sic {

// Off-policy actor-critic trainer over a shared replay buffer. Every agent
// owns a logits actor over (own obs, z), a centralized scalar critic over
// (all observations, all relaxed/one-hot actions, z), and target copies of
// both. Execution is epsilon-greedy argmax; updates relax actions with the
// Gumbel-softmax so critic gradients reach the actor. One update round runs
// every `update_every` stored transitions once `warmup` transitions exist.
class MaddpgTrainer : public TeamTrainer {
 public:
  MaddpgTrainer(TeamEnvView view, TrainParams params, std::string prefix, const StreamFn& stream);

  std::vector<PolicyHandle> policy_handles() const override;
  void on_transition(const ReplayBuffer& buffer,
                     const std::vector<NextActionSource>& sources) override;
  bool needs_replay() const override { return true; }
  void fill_sources(std::vector<NextActionSource>& all) const override;
  void visit_nets(const NetVisitor& fn) override;
  void visit_adam(const AdamVisitor& fn) override;
  void visit_counters(const CounterVisitor& fn) override;

  // One optimization round on a sampled batch; exposed for tests.
  void update_round(const ReplayBuffer& buffer, const std::vector<NextActionSource>& sources);

  Mlp& actor(int local) { return *actors_[static_cast<size_t>(local)]; }
  Mlp& critic(int local) { return *critics_[static_cast<size_t>(local)]; }
  Mlp& target_actor(int local) { return *target_actors_[static_cast<size_t>(local)]; }
  Mlp& target_critic(int local) { return *target_critics_[static_cast<size_t>(local)]; }
  Mlp* unet() { return unet_.get(); }
  double current_epsilon() const;

 private:
  int critic_input_dim() const;

  std::vector<std::unique_ptr<Mlp>> actors_;
  std::vector<std::unique_ptr<Mlp>> critics_;
  std::vector<std::unique_ptr<Mlp>> target_actors_;
  std::vector<std::unique_ptr<Mlp>> target_critics_;
  std::unique_ptr<Mlp> unet_;
  std::vector<AdamState> actor_opt_;
  std::vector<AdamState> critic_opt_;
  AdamState unet_opt_;
  Rng* update_rng_ = nullptr;
  Rng* buffer_rng_ = nullptr;
  long long steps_since_update_ = 0;
};

}  // namespace sic
