#include "sic/env/matrix_game.hpp"

namespace sic::env {

namespace {

PayoffMatrix make_base() {
  PayoffMatrix m;
  m.id = 4;
  auto row = [&](int r, Payoff a, Payoff b, Payoff c, Payoff d) {
    m.entries[static_cast<size_t>(r)] = {a, b, c, d};
  };
  //            vs Rock     vs Paper    vs Scissors  vs Well
  row(kRock, {0, 0}, {1, -1}, {-1, 1}, {1, -1});
  row(kPaper, {-1, 1}, {0, 0}, {1, -1}, {1, -1});
  row(kScissors, {1, -1}, {-1, 1}, {0, 0}, {-1, 1});
  row(kWell, {-1, 1}, {-1, 1}, {1, -1}, {0, 0});
  return m;
}

int check_individual_action(int a) {
  if (a != kActY && a != kActA) throw ActionError("matrix game: individual action must be 0 or 1");
  return a;
}

int team_joint_index(const JointAction& team) {
  if (team.actions.size() != 2)
    throw InputShapeError("matrix game: a team plays exactly two individual actions");
  return joint_action_index(check_individual_action(team.actions[0]),
                            check_individual_action(team.actions[1]));
}

}  // namespace

const PayoffMatrix& base_payoff_matrix() {
  static const PayoffMatrix m = make_base();
  return m;
}

int joint_action_index(int first_action, int second_action) {
  return 2 * first_action + second_action;
}

Payoff rpsw_payoff(const JointAction& row_team, const JointAction& col_team) {
  return base_payoff_matrix().at(team_joint_index(row_team), team_joint_index(col_team));
}

std::array<PayoffMatrix, 4> build_matrix_set() {
  std::array<PayoffMatrix, 4> out;
  const PayoffMatrix& base = base_payoff_matrix();
  for (int i = 1; i <= 4; ++i) {
    PayoffMatrix m = base;
    m.id = i;
    if (i != 4) {
      int k = i - 1;  // 0-based joint action being swapped with Well
      std::swap(m.entries[static_cast<size_t>(k)], m.entries[3]);
      for (auto& row : m.entries) std::swap(row[static_cast<size_t>(k)], row[3]);
    }
    out[static_cast<size_t>(i - 1)] = m;
  }
  return out;
}

OneStepRpsw::OneStepRpsw() = default;

void OneStepRpsw::reset(Rng&) { done_ = false; }

void OneStepRpsw::observe(int agent, std::vector<double>& out) const {
  if (agent < 0 || agent >= 4) throw InputShapeError("OneStepRpsw: bad agent id");
  out.assign(1, 1.0);
}

StepResult OneStepRpsw::step(const JointAction& joint) {
  if (done_) throw EpisodeFinishedError("OneStepRpsw: episode already finished");
  if (joint.actions.size() != 4) throw InputShapeError("OneStepRpsw: expected 4 actions");
  JointAction row{{joint.actions[0], joint.actions[1]}};
  JointAction col{{joint.actions[2], joint.actions[3]}};
  Payoff p = rpsw_payoff(row, col);
  done_ = true;
  StepResult res;
  res.rewards = {p.first, p.first, p.second, p.second};
  res.done = true;
  return res;
}

MultiStepRpsw::MultiStepRpsw(int rounds) : rounds_(rounds), matrices_(build_matrix_set()) {
  if (rounds < 1) throw ParameterError("MultiStepRpsw: rounds must be >= 1");
}

void MultiStepRpsw::reset(Rng& rng) {
  step_ = 0;
  row_total_ = 0.0;
  col_total_ = 0.0;
  round_matrix_ids_.resize(static_cast<size_t>(rounds_));
  for (int t = 0; t < rounds_; ++t) round_matrix_ids_[static_cast<size_t>(t)] = 1 + rng.uniform_int(4);
  matrix_id_ = round_matrix_ids_[0];
}

void MultiStepRpsw::observe(int agent, std::vector<double>& out) const {
  if (agent < 0 || agent >= 4) throw InputShapeError("MultiStepRpsw: bad agent id");
  out.assign(4, 0.0);
  out[static_cast<size_t>(matrix_id_ - 1)] = 1.0;
}

StepResult MultiStepRpsw::step(const JointAction& joint) {
  if (done()) throw EpisodeFinishedError("MultiStepRpsw: episode already finished");
  if (joint.actions.size() != 4) throw InputShapeError("MultiStepRpsw: expected 4 actions");
  JointAction row{{joint.actions[0], joint.actions[1]}};
  JointAction col{{joint.actions[2], joint.actions[3]}};
  int r = team_joint_index(row);
  int c = team_joint_index(col);
  const Payoff& p = matrices_[static_cast<size_t>(matrix_id_ - 1)].at(r, c);
  row_total_ += p.first;
  col_total_ += p.second;

  step_ += 1;
  StepResult res;
  res.done = step_ >= rounds_;
  if (res.done) {
    res.rewards = {row_total_, row_total_, col_total_, col_total_};
  } else {
    res.rewards = {0.0, 0.0, 0.0, 0.0};
    matrix_id_ = round_matrix_ids_[static_cast<size_t>(step_)];
  }
  return res;
}

}  // namespace sic::env
