#pragma once

#include <vector>

#include "sic/errors.hpp"
#include "sic/rng.hpp"

namespace sic::env {

// One discrete action per agent, ordered by agent id.
struct JointAction {
  std::vector<int> actions;
};

struct CollisionEvent {
  int predator = -1;
  int prey = -1;
  double x = 0.0;
  double y = 0.0;
};

struct StepResult {
  std::vector<double> rewards;  // per agent
  bool done = false;
  std::vector<CollisionEvent> events;
};

// Episodic multi-team environment. Agents are numbered 0..agent_count()-1 and
// grouped into contiguous teams; rewards are returned per agent each step.
class Env {
 public:
  virtual ~Env() = default;

  virtual int agent_count() const = 0;
  virtual int team_count() const = 0;
  virtual int team_of(int agent) const = 0;
  virtual int action_count(int agent) const = 0;
  virtual int obs_dim(int agent) const = 0;
  virtual int episode_length() const = 0;

  virtual void reset(Rng& rng) = 0;
  virtual void observe(int agent, std::vector<double>& out) const = 0;

  // Advances one step. Throws ActionError on an out-of-range action and
  // EpisodeFinishedError when called after the episode ended.
  virtual StepResult step(const JointAction& joint) = 0;

  virtual bool done() const = 0;

  std::vector<int> team_agents(int team) const {
    std::vector<int> out;
    for (int a = 0; a < agent_count(); ++a)
      if (team_of(a) == team) out.push_back(a);
    return out;
  }
};

}  // namespace sic::env
