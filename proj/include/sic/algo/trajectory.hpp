#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sic/env/env.hpp"
#include "sic/rng.hpp"
#include "sic/signal.hpp"

namespace sic {

struct TrajStep {
  std::vector<std::vector<double>> obs;      // per agent, taken before acting
  std::vector<int> actions;                  // per agent
  std::vector<double> rewards;               // per agent
  std::vector<std::vector<double>> hiddens;  // per agent, filled when recording is on
  std::vector<env::CollisionEvent> events;
  bool done = false;
};

// One whole episode, covering every agent of both teams.
struct Trajectory {
  std::vector<Signal> team_signals;              // per team; dim 0 when unsignalled
  std::vector<TrajStep> steps;
  std::vector<std::vector<double>> final_obs;    // per agent, after the last step
  uint64_t seed = 0;
  std::string env_id;

  int length() const { return static_cast<int>(steps.size()); }
  double team_return(int team, const env::Env& e) const {
    double acc = 0.0;
    for (const TrajStep& s : steps)
      for (int a = 0; a < static_cast<int>(s.rewards.size()); ++a)
        if (e.team_of(a) == team) acc += s.rewards[static_cast<size_t>(a)];
    return acc;
  }
};

// One stored environment transition for off-policy training.
struct Transition {
  std::vector<std::vector<double>> obs;       // per agent
  std::vector<std::vector<double>> next_obs;  // per agent
  std::vector<int> actions;                   // per agent
  std::vector<double> rewards;                // per agent
  std::vector<std::vector<double>> team_signals;
  bool done = false;
};

// Fixed-capacity ring with FIFO eviction. Batches are sampled uniformly
// without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void add(Transition t);
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  int64_t inserted() const { return inserted_; }
  const Transition& at(int i) const { return items_[static_cast<size_t>(i)]; }

  // Distinct indices into the current contents. Throws NotReadyError when the
  // buffer holds fewer than batch items.
  std::vector<int> sample_indices(int batch, Rng& rng) const;

  // Ring state, exposed so checkpoints can restore eviction order exactly.
  int next_slot() const { return next_; }
  void restore(std::vector<Transition> items, int next, int64_t inserted);

 private:
  int capacity_;
  int next_ = 0;
  int64_t inserted_ = 0;
  std::vector<Transition> items_;
};

}  // namespace sic
