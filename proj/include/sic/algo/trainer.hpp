#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sic/algo/rollout.hpp"
#include "sic/algo/trajectory.hpp"
#include "sic/mlp.hpp"
#include "sic/optimizer.hpp"
#include "sic/rng.hpp"

namespace sic {

// Effective hyperparameters for one team's trainer. Scenario/algorithm
// defaults are filled in by the config loader; everything here is final.
struct TrainParams {
  double lr = 1e-4;         // policy / actor
  double lr_critic = 0.0;   // 0 -> same as lr
  double lr_unet = 0.0;     // 0 -> same as lr
  double alpha = 0.0;       // MI regularizer coefficient
  double entropy = 0.0;     // policy entropy bonus coefficient
  int dz = 0;               // coordination signal dimension
  double gamma = 0.99;
  double lambda = 0.8;      // GAE
  int batch_size = 32;      // transitions per update
  double clip_norm = 0.0;   // 0 -> no clipping
  double gumbel_tau = 1.0;
  double target_rate = 0.01;
  int warmup = 1024;        // replay transitions before off-policy updates
  int update_every = 1;     // env steps between off-policy update rounds
  double eps_start = 0.3;
  double eps_end = 0.05;
  std::vector<int> policy_hidden{8};
  std::vector<int> critic_hidden{64, 64};
  std::vector<int> unet_hidden{8, 8};
  long long total_episodes = 100000;
  bool critic_signal = true;  // centralized critics receive the team signal

  double critic_lr() const { return lr_critic > 0.0 ? lr_critic : lr; }
  double unet_lr() const { return lr_unet > 0.0 ? lr_unet : lr; }
};

// What a trainer needs to know about the environment and its own team.
struct TeamEnvView {
  int team_id = 0;
  std::vector<int> agents;         // global agent ids, ascending
  std::vector<int> all_obs_dims;   // indexed by global agent id
  std::vector<int> all_n_actions;  // indexed by global agent id
  int episode_length = 1;

  int size() const { return static_cast<int>(agents.size()); }
  int obs_dim(int local) const { return all_obs_dims[static_cast<size_t>(agents[static_cast<size_t>(local)])]; }
  int n_actions(int local) const { return all_n_actions[static_cast<size_t>(agents[static_cast<size_t>(local)])]; }
  int total_obs_dim() const {
    int s = 0;
    for (int d : all_obs_dims) s += d;
    return s;
  }
  int total_action_dim() const {
    int s = 0;
    for (int k : all_n_actions) s += k;
    return s;
  }
  int team_obs_dim() const {
    int s = 0;
    for (int a : agents) s += all_obs_dims[static_cast<size_t>(a)];
    return s;
  }
};

struct TeamMetrics {
  double policy_loss = 0.0;  // last update
  double critic_loss = 0.0;
  double mi_loss = 0.0;
  long long updates = 0;
};

// Per-agent recipe for producing the relaxed next action that centralized
// critics feed into their TD target. Teams under off-policy training expose
// their target actors with fresh Gumbel noise; frozen or on-policy teams
// expose their execution nets deterministically.
struct NextActionSource {
  const Mlp* net = nullptr;
  PolicyMode mode = PolicyMode::DeterministicGumbel;
  bool noisy = false;  // relax with fresh Gumbel noise from the updater's stream
  double tau = 1.0;
  int signal_dim = 0;  // owning team's D_z
  int team = 0;        // owning team id (selects the stored signal)
};

// Linear anneal from eps_start to eps_end over the first half of training,
// then flat at eps_end.
double epsilon_schedule(double eps_start, double eps_end, long long episode, long long total);

// Named-RNG-stream lookup provided by the experiment runner; streams are
// derived from the master seed by label and owned centrally so checkpoints
// can capture every stream state in one place.
using StreamFn = std::function<Rng&(const std::string&)>;

class TeamTrainer {
 public:
  TeamTrainer(TeamEnvView view, TrainParams params, std::string prefix)
      : view_(std::move(view)), params_(std::move(params)), prefix_(std::move(prefix)) {}
  virtual ~TeamTrainer() = default;

  // Execution-time handles for this team's agents (team-local order).
  virtual std::vector<PolicyHandle> policy_handles() const = 0;

  // Called once per finished episode, in team order. On-policy trainers
  // accumulate the trajectory and update when a batch is full.
  virtual void on_episode(const Trajectory& traj) { (void)traj; episodes_seen_ += 1; }

  // Called after every stored transition for off-policy trainers; `sources`
  // covers every global agent. Default: no-op.
  virtual void on_transition(const ReplayBuffer& buffer, const std::vector<NextActionSource>& sources) {
    (void)buffer;
    (void)sources;
  }

  virtual bool needs_replay() const { return false; }

  // Writes this team's entries of the global next-action table.
  virtual void fill_sources(std::vector<NextActionSource>& all) const = 0;

  using NetVisitor = std::function<void(const std::string&, Mlp&)>;
  using AdamVisitor = std::function<void(const std::string&, AdamState&)>;
  using CounterVisitor = std::function<void(const std::string&, long long&)>;
  virtual void visit_nets(const NetVisitor& fn) = 0;
  virtual void visit_adam(const AdamVisitor& fn) = 0;
  virtual void visit_counters(const CounterVisitor& fn) {
    fn(prefix_ + ".episodes_seen", episodes_seen_);
    fn(prefix_ + ".updates", metrics_.updates);
  }

  // On-policy trainers expose their not-yet-consumed episodes so checkpoints
  // can make resume exact; others return null.
  virtual std::vector<Trajectory>* mutable_pending() { return nullptr; }

  const TeamMetrics& metrics() const { return metrics_; }
  TeamMetrics& metrics_mut() { return metrics_; }
  const TeamEnvView& view() const { return view_; }
  const TrainParams& params() const { return params_; }
  int signal_dim() const { return params_.dz; }
  long long episodes_seen() const { return episodes_seen_; }

 protected:
  TeamEnvView view_;
  TrainParams params_;
  std::string prefix_;
  TeamMetrics metrics_;
  long long episodes_seen_ = 0;
};

// Fixed policies loaded from a checkpoint (or scripted nets): participates in
// rollouts and in other teams' TD targets but never updates.
class FrozenTeam : public TeamTrainer {
 public:
  FrozenTeam(TeamEnvView view, TrainParams params, std::string prefix, PolicyMode mode,
             std::vector<std::unique_ptr<Mlp>> nets)
      : TeamTrainer(std::move(view), std::move(params), std::move(prefix)),
        mode_(mode),
        nets_(std::move(nets)) {}

  std::vector<PolicyHandle> policy_handles() const override {
    std::vector<PolicyHandle> out;
    for (const auto& n : nets_) out.push_back({n.get(), mode_, params_.dz, 0.0});
    return out;
  }

  void fill_sources(std::vector<NextActionSource>& all) const override {
    for (int i = 0; i < view_.size(); ++i)
      all[static_cast<size_t>(view_.agents[static_cast<size_t>(i)])] =
          {nets_[static_cast<size_t>(i)].get(), mode_, false, params_.gumbel_tau, params_.dz, view_.team_id};
  }

  void visit_nets(const NetVisitor& fn) override {
    for (int i = 0; i < view_.size(); ++i)
      fn(prefix_ + ".a" + std::to_string(i) + ".policy", *nets_[static_cast<size_t>(i)]);
  }
  void visit_adam(const AdamVisitor&) override {}

  PolicyMode mode() const { return mode_; }

 private:
  PolicyMode mode_;
  std::vector<std::unique_ptr<Mlp>> nets_;
};

// Total env steps across a set of stored episodes.
long long total_steps(const std::vector<Trajectory>& trajs);

// [in, hidden..., out] ReLU network spec.
MlpSpec make_mlp_spec(int in, const std::vector<int>& hidden, int out, OutputActivation oa);

// Records the signal-reconstruction loss for a batch assembled from whole
// episodes: one row per env step, in episode order. The state rows are the
// team's concatenated observations, the targets the episode signals, and
// `hiddens` the policies' last-hidden-layer nodes over the same rows.
ad::NodeId episode_mi_node(ad::Tape& tape, Mlp& unet, const TeamEnvView& view, int dz,
                           const std::vector<Trajectory>& episodes,
                           std::span<const ad::NodeId> hiddens);

}  // namespace sic
