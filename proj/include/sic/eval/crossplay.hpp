#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sic/algo/rollout.hpp"
#include "sic/config.hpp"

namespace sic {

struct CrossPlayResult {
  std::string predator_model;
  std::string prey_model;
  std::vector<uint64_t> seeds;
  std::vector<double> scores;  // per seed: collisions per 100 episodes
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across seeds
};

// Plays frozen predator policies against frozen prey policies, both loaded
// from final checkpoints of predator-prey runs, for n_episodes per seed. The
// score is the total collision count scaled to 100 episodes; every seed's
// episode set is a pure function of (checkpoints, seed). Scenario mismatch
// between the two checkpoints raises ConfigError.
CrossPlayResult cross_play(const std::string& predator_ckpt, const std::string& prey_ckpt,
                           int n_episodes, const std::vector<uint64_t>& seeds,
                           ExecMode exec = ExecMode::Sample);

struct HeatmapResult {
  long long total_collisions = 0;
  int games = 0;
  std::string csv_path;
};

// Repeats n_games episodes from one fixed initial layout (drawn once from the
// seed) and appends every collision to a CSV with columns
// episode,step,predator_id,prey_id,x,y. Play stays stochastic across games so
// the position cloud maps where each pairing's collisions concentrate.
HeatmapResult collision_heatmap(const std::string& predator_ckpt, const std::string& prey_ckpt,
                                int n_games, uint64_t seed, const std::string& out_csv);

struct SweepCell {
  int dz = 0;
  uint64_t seed = 0;
  double score = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;   // every (D_z, seed) pairing, in sweep order
  std::vector<int> dz_values;
  std::vector<double> means;      // per D_z across seeds
  std::vector<double> stddevs;
};

// Trains signal-augmented predators at each listed signal dimension against
// the fixed prey checkpoint (one run per (D_z, seed), written under out_dir),
// then scores each trained model with cross_play against the same preys.
// D_z = 0 runs the identical no-signal code path the base trainer uses.
// Writes out_dir/sweep.csv. Negative D_z raises ConfigError; the base config
// must be a predator-prey experiment.
SweepResult sensitivity_sweep(const std::vector<int>& dz_list, const ExperimentConfig& base,
                              const std::string& prey_ckpt, const std::vector<uint64_t>& seeds,
                              int eval_episodes, const std::string& out_dir);

}  // namespace sic
