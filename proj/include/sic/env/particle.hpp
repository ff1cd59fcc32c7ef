#pragma once

#include <vector>

#include "sic/env/env.hpp"

namespace sic::env {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// World constants for the predator-prey arena. Every field can be overridden
// from the experiment config.
struct ParticleConfig {
  int team_size = 2;  // M predators and M preys
  int episode_length = 25;
  int landmark_count = 2;
  double dt = 0.1;
  double damping = 0.25;
  double accel_predator = 3.0;
  double accel_prey = 4.0;
  double max_speed_predator = 1.0;
  double max_speed_prey = 1.3;
  double radius_predator = 0.075;
  double radius_prey = 0.05;
  double radius_landmark = 0.2;
  double arena_half_extent = 1.0;
  double collision_reward = 10.0;
  double contact_spring = 100.0;   // landmark pushback
  double boundary_spring = 100.0;  // soft wall beyond the arena edge
  int placement_retries = 1000;
};

// Actions: 0 stop, 1 +x, 2 -x, 3 +y, 4 -y.
inline constexpr int kParticleActionCount = 5;

// Two-team particle arena. Predators (agents 0..M-1) earn +collision_reward
// for every rigid-disk overlap with a prey (agents M..2M-1), which loses the
// same amount. Landmarks repel agents with a stiff spring; agents themselves
// pass through each other. Integration is damped semi-implicit Euler:
// v <- clamp(v * (1 - damping) + a * dt), x <- x + v * dt.
class ParticleWorld : public Env {
 public:
  explicit ParticleWorld(ParticleConfig cfg = {});

  int agent_count() const override { return cfg_.team_size * 2; }
  int team_count() const override { return 2; }
  int team_of(int agent) const override { return agent < cfg_.team_size ? 0 : 1; }
  int action_count(int) const override { return kParticleActionCount; }
  int obs_dim(int agent) const override;
  int episode_length() const override { return cfg_.episode_length; }

  // Uniform placement inside the arena with zero velocities; rejects layouts
  // where any agent overlaps a landmark. Throws PlacementError when no valid
  // layout is found within placement_retries attempts.
  void reset(Rng& rng) override;

  // Layout: own position, own velocity, landmark positions relative to self,
  // other agents' positions relative to self (by agent id), and for predator
  // observers the absolute velocities of every prey.
  void observe(int agent, std::vector<double>& out) const override;

  StepResult step(const JointAction& joint) override;
  bool done() const override { return step_ >= cfg_.episode_length; }

  // Strict overlap test over every predator-prey pair; the event position is
  // the midpoint of the two centers.
  std::vector<CollisionEvent> detect_collisions() const;

  const ParticleConfig& config() const { return cfg_; }
  bool is_predator(int agent) const { return team_of(agent) == 0; }

  // Direct state access for tests and fixed-layout evaluation.
  void set_state(const std::vector<Vec2>& agent_pos, const std::vector<Vec2>& agent_vel,
                 const std::vector<Vec2>& landmark_pos);
  const std::vector<Vec2>& agent_positions() const { return pos_; }
  const std::vector<Vec2>& agent_velocities() const { return vel_; }
  const std::vector<Vec2>& landmark_positions() const { return landmarks_; }
  int steps_taken() const { return step_; }

 private:
  double agent_radius(int agent) const {
    return is_predator(agent) ? cfg_.radius_predator : cfg_.radius_prey;
  }

  ParticleConfig cfg_;
  std::vector<Vec2> pos_;
  std::vector<Vec2> vel_;
  std::vector<Vec2> landmarks_;
  int step_ = 0;
};

}  // namespace sic::env
