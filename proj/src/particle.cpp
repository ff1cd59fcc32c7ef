#include "sic/env/particle.hpp"

#include <cmath>

namespace sic::env {

namespace {

double dist(const Vec2& a, const Vec2& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ParticleWorld::ParticleWorld(ParticleConfig cfg) : cfg_(cfg) {
  if (cfg_.team_size < 1) throw ParameterError("ParticleWorld: team_size must be >= 1");
  if (cfg_.episode_length < 1) throw ParameterError("ParticleWorld: episode_length must be >= 1");
  if (cfg_.dt <= 0.0) throw ParameterError("ParticleWorld: dt must be positive");
  pos_.assign(static_cast<size_t>(agent_count()), {});
  vel_.assign(static_cast<size_t>(agent_count()), {});
  landmarks_.assign(static_cast<size_t>(cfg_.landmark_count), {});
  step_ = cfg_.episode_length;  // not yet reset
}

int ParticleWorld::obs_dim(int agent) const {
  int n = agent_count();
  int base = 2 + 2 + 2 * cfg_.landmark_count + 2 * (n - 1);
  if (is_predator(agent)) base += 2 * cfg_.team_size;  // prey velocities
  return base;
}

void ParticleWorld::reset(Rng& rng) {
  double e = cfg_.arena_half_extent;
  for (int attempt = 0; attempt < cfg_.placement_retries; ++attempt) {
    for (Vec2& l : landmarks_) {
      l.x = rng.uniform(-e, e);
      l.y = rng.uniform(-e, e);
    }
    for (int a = 0; a < agent_count(); ++a) {
      pos_[static_cast<size_t>(a)].x = rng.uniform(-e, e);
      pos_[static_cast<size_t>(a)].y = rng.uniform(-e, e);
      vel_[static_cast<size_t>(a)] = {0.0, 0.0};
    }
    bool ok = true;
    for (int a = 0; a < agent_count() && ok; ++a) {
      for (int l = 0; l < cfg_.landmark_count && ok; ++l) {
        double min_d = agent_radius(a) + cfg_.radius_landmark;
        if (dist(pos_[static_cast<size_t>(a)], landmarks_[static_cast<size_t>(l)]) < min_d)
          ok = false;
      }
    }
    if (ok) {
      step_ = 0;
      return;
    }
  }
  throw PlacementError("ParticleWorld: could not place agents clear of landmarks");
}

void ParticleWorld::observe(int agent, std::vector<double>& out) const {
  if (agent < 0 || agent >= agent_count()) throw InputShapeError("ParticleWorld: bad agent id");
  const Vec2& p = pos_[static_cast<size_t>(agent)];
  out.clear();
  out.reserve(static_cast<size_t>(obs_dim(agent)));
  out.push_back(p.x);
  out.push_back(p.y);
  out.push_back(vel_[static_cast<size_t>(agent)].x);
  out.push_back(vel_[static_cast<size_t>(agent)].y);
  for (const Vec2& l : landmarks_) {
    out.push_back(l.x - p.x);
    out.push_back(l.y - p.y);
  }
  for (int other = 0; other < agent_count(); ++other) {
    if (other == agent) continue;
    out.push_back(pos_[static_cast<size_t>(other)].x - p.x);
    out.push_back(pos_[static_cast<size_t>(other)].y - p.y);
  }
  if (is_predator(agent)) {
    for (int prey = cfg_.team_size; prey < agent_count(); ++prey) {
      out.push_back(vel_[static_cast<size_t>(prey)].x);
      out.push_back(vel_[static_cast<size_t>(prey)].y);
    }
  }
}

StepResult ParticleWorld::step(const JointAction& joint) {
  if (done()) throw EpisodeFinishedError("ParticleWorld: episode already finished");
  if (static_cast<int>(joint.actions.size()) != agent_count())
    throw InputShapeError("ParticleWorld: one action per agent required");

  int n = agent_count();
  for (int a = 0; a < n; ++a) {
    int act = joint.actions[static_cast<size_t>(a)];
    if (act < 0 || act >= kParticleActionCount)
      throw ActionError("ParticleWorld: action must be in 0..4");
  }

  double e = cfg_.arena_half_extent;
  for (int a = 0; a < n; ++a) {
    double accel = is_predator(a) ? cfg_.accel_predator : cfg_.accel_prey;
    Vec2 force{};
    switch (joint.actions[static_cast<size_t>(a)]) {
      case 0:
        break;
      case 1:
        force.x = accel;
        break;
      case 2:
        force.x = -accel;
        break;
      case 3:
        force.y = accel;
        break;
      case 4:
        force.y = -accel;
        break;
    }

    const Vec2& p = pos_[static_cast<size_t>(a)];
    for (const Vec2& l : landmarks_) {
      double min_d = agent_radius(a) + cfg_.radius_landmark;
      double d = dist(p, l);
      if (d < min_d) {
        double depth = min_d - d;
        double inv = d > 1e-9 ? 1.0 / d : 0.0;
        double ux = d > 1e-9 ? (p.x - l.x) * inv : 1.0;
        double uy = d > 1e-9 ? (p.y - l.y) * inv : 0.0;
        force.x += cfg_.contact_spring * depth * ux;
        force.y += cfg_.contact_spring * depth * uy;
      }
    }
    if (p.x > e) force.x -= cfg_.boundary_spring * (p.x - e);
    if (p.x < -e) force.x += cfg_.boundary_spring * (-e - p.x);
    if (p.y > e) force.y -= cfg_.boundary_spring * (p.y - e);
    if (p.y < -e) force.y += cfg_.boundary_spring * (-e - p.y);

    Vec2& v = vel_[static_cast<size_t>(a)];
    v.x = v.x * (1.0 - cfg_.damping) + force.x * cfg_.dt;
    v.y = v.y * (1.0 - cfg_.damping) + force.y * cfg_.dt;
    double cap = is_predator(a) ? cfg_.max_speed_predator : cfg_.max_speed_prey;
    double speed = std::sqrt(v.x * v.x + v.y * v.y);
    if (speed > cap) {
      v.x *= cap / speed;
      v.y *= cap / speed;
    }
  }
  for (int a = 0; a < n; ++a) {
    pos_[static_cast<size_t>(a)].x += vel_[static_cast<size_t>(a)].x * cfg_.dt;
    pos_[static_cast<size_t>(a)].y += vel_[static_cast<size_t>(a)].y * cfg_.dt;
  }

  step_ += 1;
  StepResult res;
  res.done = done();
  res.events = detect_collisions();
  res.rewards.assign(static_cast<size_t>(n), 0.0);
  double bounty = cfg_.collision_reward * static_cast<double>(res.events.size());
  for (int a = 0; a < n; ++a)
    res.rewards[static_cast<size_t>(a)] = is_predator(a) ? bounty : -bounty;
  return res;
}

std::vector<CollisionEvent> ParticleWorld::detect_collisions() const {
  std::vector<CollisionEvent> events;
  double contact = cfg_.radius_predator + cfg_.radius_prey;
  for (int pred = 0; pred < cfg_.team_size; ++pred) {
    for (int prey = cfg_.team_size; prey < agent_count(); ++prey) {
      const Vec2& a = pos_[static_cast<size_t>(pred)];
      const Vec2& b = pos_[static_cast<size_t>(prey)];
      if (dist(a, b) < contact) {
        events.push_back({pred, prey, 0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
    }
  }
  return events;
}

void ParticleWorld::set_state(const std::vector<Vec2>& agent_pos,
                              const std::vector<Vec2>& agent_vel,
                              const std::vector<Vec2>& landmark_pos) {
  if (static_cast<int>(agent_pos.size()) != agent_count() ||
      static_cast<int>(agent_vel.size()) != agent_count() ||
      static_cast<int>(landmark_pos.size()) != cfg_.landmark_count)
    throw InputShapeError("ParticleWorld::set_state: size mismatch");
  pos_ = agent_pos;
  vel_ = agent_vel;
  landmarks_ = landmark_pos;
  step_ = 0;
}

}  // namespace sic::env
