#pragma once

#include <array>
#include <utility>

#include "sic/env/env.hpp"

namespace sic::env {

// Individual actions in the two-player-per-team game.
inline constexpr int kActY = 0;
inline constexpr int kActA = 1;

// Joint actions of one team, indexed 2 * first + second:
// 0 = (Y,Y) Rock, 1 = (Y,A) Paper, 2 = (A,Y) Scissors, 3 = (A,A) Well.
inline constexpr int kRock = 0;
inline constexpr int kPaper = 1;
inline constexpr int kScissors = 2;
inline constexpr int kWell = 3;

using Payoff = std::pair<double, double>;  // (row reward, col reward)

struct PayoffMatrix {
  int id = 4;  // 1..4; 4 is the base game
  std::array<std::array<Payoff, 4>, 4> entries{};

  const Payoff& at(int row_joint, int col_joint) const {
    return entries[static_cast<size_t>(row_joint)][static_cast<size_t>(col_joint)];
  }
};

// The base 4x4 payoff table of the one-step game.
const PayoffMatrix& base_payoff_matrix();

// Payoff for one round given each team's pair of individual actions.
// Throws ActionError when an action is outside {0, 1}, InputShapeError when a
// team tuple does not have exactly two entries.
Payoff rpsw_payoff(const JointAction& row_team, const JointAction& col_team);

// Matrix family {M1..M4}: M4 is the base table; Mi swaps joint action i with
// joint action 4 (rows first, then columns), which relabels the game so that
// the i-th joint action takes over the dominated role.
std::array<PayoffMatrix, 4> build_matrix_set();

int joint_action_index(int first_action, int second_action);

// One round of the base game between two teams of two. Observations are a
// constant scalar 1 (the game has no state); rewards are shared within a team.
class OneStepRpsw : public Env {
 public:
  OneStepRpsw();

  int agent_count() const override { return 4; }
  int team_count() const override { return 2; }
  int team_of(int agent) const override { return agent / 2; }
  int action_count(int) const override { return 2; }
  int obs_dim(int) const override { return 1; }
  int episode_length() const override { return 1; }

  void reset(Rng& rng) override;
  void observe(int agent, std::vector<double>& out) const override;
  StepResult step(const JointAction& joint) override;
  bool done() const override { return done_; }

 private:
  bool done_ = true;
};

// T rounds; each round an index into {M1..M4} is drawn uniformly and announced
// to every agent as a one-hot observation. Per-round payoffs are accumulated
// and paid out as a single terminal reward.
class MultiStepRpsw : public Env {
 public:
  explicit MultiStepRpsw(int rounds = 4);

  int agent_count() const override { return 4; }
  int team_count() const override { return 2; }
  int team_of(int agent) const override { return agent / 2; }
  int action_count(int) const override { return 2; }
  int obs_dim(int) const override { return 4; }
  int episode_length() const override { return rounds_; }

  void reset(Rng& rng) override;
  void observe(int agent, std::vector<double>& out) const override;
  StepResult step(const JointAction& joint) override;
  bool done() const override { return step_ >= rounds_; }

  int current_matrix_id() const { return matrix_id_; }

 private:
  int rounds_;
  int step_ = 0;
  int matrix_id_ = 4;
  double row_total_ = 0.0;
  double col_total_ = 0.0;
  std::array<PayoffMatrix, 4> matrices_;
  std::vector<int> round_matrix_ids_;  // drawn at reset, one per round
};

}  // namespace sic::env
