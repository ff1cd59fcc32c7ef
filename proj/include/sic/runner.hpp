#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sic/algo/trainer.hpp"
#include "sic/checkpoint.hpp"
#include "sic/config.hpp"

namespace sic {

struct RunResult {
  long long episodes_trained = 0;          // episodes run by this invocation
  std::vector<double> mean_recent_reward;  // per team, trailing-window mean
  double wall_seconds = 0.0;
  std::string checkpoint_path;
};

// Owns one experiment end to end: the environment, one trainer per team, and
// every named RNG stream. All randomness flows through streams derived from
// the master seed by label, so training is a pure function of the config, and
// checkpoints capture the complete state for exact resume.
class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg);
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  // Trains until the configured episode count, or for `stop_after` more
  // episodes when positive. Writes config.cfg, metrics.csv (one row per
  // metrics_every episodes), periodic checkpoints when configured,
  // checkpoint_final.txt, and summary.txt under out_dir. A NumericalError
  // during training propagates; the last periodic checkpoint survives.
  RunResult run(long long stop_after = 0);

  // One training episode: rollout (feeding stored transitions to off-policy
  // trainers mid-episode), then the finished trajectory to every team.
  Trajectory train_episode();

  Checkpoint make_checkpoint();
  // Restores a checkpoint into this (freshly constructed, same-config)
  // runner. Any mismatch between stored and live names, architectures, or
  // shapes raises CheckpointError before anything is half-applied.
  void apply_checkpoint(const Checkpoint& ck);

  // Rebuilds a runner from a saved checkpoint, optionally overriding the
  // episode budget (which reshapes exploration schedules) and output
  // directory.
  static std::unique_ptr<Runner> from_checkpoint(const std::string& path,
                                                 long long override_episodes = 0,
                                                 const std::string& override_out = "");

  // Named stream, created on first use from the master seed.
  Rng& stream(const std::string& name);

  const ExperimentConfig& config() const { return cfg_; }
  env::Env& env() { return *env_; }
  TeamTrainer& team(int t) { return *teams_[static_cast<size_t>(t)]; }
  int team_count() const { return static_cast<int>(teams_.size()); }
  long long episode() const { return episode_; }
  ReplayBuffer* replay() { return buffer_.get(); }

 private:
  void write_metrics_row(std::ostream& out);

  ExperimentConfig cfg_;
  std::unique_ptr<env::Env> env_;
  std::map<std::string, Rng> streams_;  // node-based: trainer-held pointers stay valid
  std::vector<std::unique_ptr<TeamTrainer>> teams_;
  std::unique_ptr<ReplayBuffer> buffer_;
  long long episode_ = 0;
  std::vector<double> window_reward_;       // sums since the last metrics row
  long long window_count_ = 0;
  std::vector<std::deque<double>> tail_;    // trailing returns for summary.txt
  long long tail_cap_ = 1;
};

// Fixed-policy team for slot `team`, loaded from the checkpoint file named in
// cfg.teams[team].freeze_checkpoint. The nets come from the same team slot of
// the source run; ConfigError when the source scenario or network shapes are
// incompatible with cfg.
std::unique_ptr<FrozenTeam> make_frozen_team(const ExperimentConfig& cfg, const env::Env& e,
                                             int team);

}  // namespace sic
