#include <cmath>
#include <string>

#include "doctest.h"
#include "sic/config.hpp"
#include "sic/errors.hpp"
#include "sic/rng.hpp"

using namespace sic;

TEST_CASE("empty text resolves matrix-game defaults") {
  ExperimentConfig cfg = parse_config("");
  CHECK(cfg.scenario == Scenario::Rpsw1Step);
  CHECK(cfg.episodes == 100000);
  CHECK(cfg.seed == 1);
  REQUIRE(cfg.teams.size() == 2);
  for (const TeamConfig& t : cfg.teams) {
    CHECK(t.algorithm == Algorithm::SicRe);
    CHECK(t.params.lr == doctest::Approx(1e-4));
    CHECK(t.params.dz == 2);
    CHECK(t.params.alpha == doctest::Approx(0.01));
    CHECK(t.params.gamma == doctest::Approx(0.99));
    CHECK(t.params.batch_size == 32);
    CHECK(t.params.policy_hidden == std::vector<int>{8});
    CHECK(t.params.unet_hidden == std::vector<int>{8, 8});
    CHECK(t.params.total_episodes == 100000);
  }
}

TEST_CASE("predator-prey defaults differ from the matrix-game ones") {
  ExperimentConfig cfg = parse_config("scenario = predator-prey\n");
  CHECK(cfg.scenario == Scenario::PredatorPrey);
  CHECK(cfg.episodes == 3000);
  CHECK(cfg.team_size == 2);
  CHECK(cfg.landmarks == 2);
  for (const TeamConfig& t : cfg.teams) {
    CHECK(t.algorithm == Algorithm::Maddpg);
    CHECK(t.params.lr == doctest::Approx(1e-3));
    CHECK(t.params.dz == 0);
    CHECK(t.params.batch_size == 256);
    CHECK(t.params.clip_norm == doctest::Approx(0.5));
    CHECK(t.params.warmup == 1024);
    CHECK(t.params.update_every == 25);
    CHECK(t.params.gamma == doctest::Approx(0.95));
    CHECK(t.params.policy_hidden == std::vector<int>{64, 64});
    CHECK(t.params.critic_hidden == std::vector<int>{64, 64});
    CHECK(t.params.unet_hidden == std::vector<int>{64});
  }
}

TEST_CASE("signalled off-policy team gets its own tuned defaults") {
  ExperimentConfig cfg = parse_config(
      "scenario = predator-prey\n[team0]\nalgorithm = sic-ma\n");
  CHECK(cfg.teams[0].algorithm == Algorithm::SicMa);
  CHECK(cfg.teams[0].params.lr == doctest::Approx(5e-4));
  CHECK(cfg.teams[0].params.dz == 20);
  CHECK(cfg.teams[0].params.alpha == doctest::Approx(1e-4));
  // The untouched team keeps the plain defaults.
  CHECK(cfg.teams[1].algorithm == Algorithm::Maddpg);
  CHECK(cfg.teams[1].params.lr == doctest::Approx(1e-3));
}

TEST_CASE("explicit keys override any default") {
  ExperimentConfig cfg = parse_config(
      "scenario = rpsw-4step\n"
      "episodes = 500\n"
      "seed = 42\n"
      "rounds = 6\n"
      "metrics_every = 10\n"
      "out = /tmp/xyz\n"
      "[team0]\n"
      "algorithm = sic-re\n"
      "lr = 0.02\n"
      "dz = 7\n"
      "alpha = 0.5\n"
      "batch_size = 16\n"
      "policy_hidden = 12,13\n"
      "[team1]\n"
      "algorithm = ind-re\n");
  CHECK(cfg.scenario == Scenario::Rpsw4Step);
  CHECK(cfg.episodes == 500);
  CHECK(cfg.seed == 42);
  CHECK(cfg.rounds == 6);
  CHECK(cfg.metrics_every == 10);
  CHECK(cfg.out_dir == "/tmp/xyz");
  CHECK(cfg.teams[0].params.lr == doctest::Approx(0.02));
  CHECK(cfg.teams[0].params.dz == 7);
  CHECK(cfg.teams[0].params.alpha == doctest::Approx(0.5));
  CHECK(cfg.teams[0].params.batch_size == 16);
  CHECK(cfg.teams[0].params.policy_hidden == std::vector<int>{12, 13});
  CHECK(cfg.teams[0].params.total_episodes == 500);
  CHECK(cfg.teams[1].algorithm == Algorithm::IndRe);
  CHECK(cfg.teams[1].params.dz == 0);
  CHECK(cfg.teams[1].params.alpha == 0.0);
}

TEST_CASE("serialization round-trips to identical bytes") {
  const char* texts[] = {
      "",
      "scenario = predator-prey\n[team0]\nalgorithm = sic-ma\nalpha = 0.125\n",
      "scenario = rpsw-4step\nrounds = 5\n[team0]\nalgorithm = sic-coma\n[team1]\nalgorithm = "
      "coma\n",
  };
  for (const char* text : texts) {
    ExperimentConfig cfg = parse_config(text);
    std::string s1 = serialize_config(cfg);
    ExperimentConfig back = parse_config(s1);
    std::string s2 = serialize_config(back);
    CHECK(s1 == s2);
  }
}

TEST_CASE("algorithm predicates") {
  CHECK(algorithm_is_sic(Algorithm::SicRe));
  CHECK(algorithm_is_sic(Algorithm::SicMa));
  CHECK(algorithm_is_sic(Algorithm::SicComa));
  CHECK_FALSE(algorithm_is_sic(Algorithm::IndRe));
  CHECK_FALSE(algorithm_is_sic(Algorithm::Maddpg));
  CHECK(algorithm_needs_replay(Algorithm::Maddpg));
  CHECK(algorithm_needs_replay(Algorithm::SicMa));
  CHECK_FALSE(algorithm_needs_replay(Algorithm::Coma));
  CHECK(algorithm_policy_mode(Algorithm::Maddpg) == PolicyMode::DeterministicGumbel);
  CHECK(algorithm_policy_mode(Algorithm::SicRe) == PolicyMode::StochasticSoftmax);

  CHECK(to_string(Scenario::PredatorPrey) == "predator-prey");
  CHECK(scenario_from_string("rpsw-1step") == Scenario::Rpsw1Step);
  CHECK_THROWS_AS(scenario_from_string("chess"), ConfigError);
  CHECK(algorithm_from_string("sic-coma") == Algorithm::SicComa);
  CHECK_THROWS_AS(algorithm_from_string("ppo"), ConfigError);
}

TEST_CASE("malformed or inconsistent configs are rejected") {
  // unknown global key
  CHECK_THROWS_AS(parse_config("flavor = spicy\n"), ConfigError);
  // unknown team key
  CHECK_THROWS_AS(parse_config("[team0]\nmomentum = 0.9\n"), ConfigError);
  // unknown section
  CHECK_THROWS_AS(parse_config("[team2]\nlr = 0.1\n"), ConfigError);
  // missing '='
  CHECK_THROWS_AS(parse_config("episodes 100\n"), ConfigError);
  // unparseable number
  CHECK_THROWS_AS(parse_config("episodes = ten\n"), ConfigError);
  // duplicate key in one scope
  CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), ConfigError);
  // negative learning rate
  CHECK_THROWS_AS(parse_config("[team0]\nlr = -1\n"), ConfigError);
  // gamma lives in [0, 1)
  CHECK_NOTHROW(parse_config("[team0]\ngamma = 0.999\n"));
  CHECK_THROWS_AS(parse_config("[team0]\ngamma = 1\n"), ConfigError);
  // off-policy algorithms require the particle scenario
  CHECK_THROWS_AS(parse_config("[team0]\nalgorithm = maddpg\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenario = rpsw-4step\n[team1]\nalgorithm = sic-ma\n"),
                  ConfigError);
  // non-signalling algorithms cannot carry a signal or a regularizer weight
  CHECK_THROWS_AS(parse_config("[team0]\nalgorithm = ind-re\ndz = 2\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config("scenario = predator-prey\n[team0]\nalgorithm = maddpg\nalpha = 0.1\n"),
      ConfigError);
  // replay must hold at least one batch
  CHECK_THROWS_AS(parse_config("scenario = predator-prey\nreplay_capacity = 10\n"
                               "[team0]\nbatch_size = 64\n"),
                  ConfigError);
  // episodes must be positive
  CHECK_THROWS_AS(parse_config("episodes = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("episodes = -5\n"), ConfigError);
}

TEST_CASE("frozen teams skip the signal-consistency validation") {
  ExperimentConfig cfg = parse_config(
      "[team0]\nalgorithm = ind-re\nfreeze = /some/checkpoint.txt\ndz = 2\n");
  CHECK(cfg.teams[0].freeze_checkpoint == "/some/checkpoint.txt");
  CHECK(cfg.teams[0].params.dz == 2);
  // And the freeze path survives a round trip.
  ExperimentConfig back = parse_config(serialize_config(cfg));
  CHECK(back.teams[0].freeze_checkpoint == "/some/checkpoint.txt");
}

TEST_CASE("environment factory matches the scenario") {
  ExperimentConfig one = parse_config("");
  auto e1 = make_env(one);
  CHECK(e1->episode_length() == 1);
  CHECK(e1->obs_dim(0) == 1);

  ExperimentConfig four = parse_config("scenario = rpsw-4step\nrounds = 7\n");
  auto e4 = make_env(four);
  CHECK(e4->episode_length() == 7);
  CHECK(e4->obs_dim(0) == 4);

  ExperimentConfig pp = parse_config("scenario = predator-prey\nteam_size = 3\nlandmarks = 1\n");
  auto ep = make_env(pp);
  CHECK(ep->agent_count() == 6);
  CHECK(ep->episode_length() == 25);
  CHECK(ep->obs_dim(0) == 2 + 2 + 2 * 1 + 2 * 5 + 2 * 3);

  TeamEnvView v0 = make_team_view(*ep, 0);
  CHECK(v0.team_id == 0);
  CHECK(v0.agents == std::vector<int>{0, 1, 2});
  CHECK(v0.all_obs_dims.size() == 6);
  CHECK(v0.episode_length == 25);
  TeamEnvView v1 = make_team_view(*ep, 1);
  CHECK(v1.agents == std::vector<int>{3, 4, 5});
}

TEST_CASE("fmt_double reconstructs doubles bit-exactly") {
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(0.0) == "0");
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    double v = rng.uniform(-10, 10) * std::pow(10.0, rng.uniform_int(9) - 4);
    CHECK(std::stod(fmt_double(v)) == v);
  }
  double awkward = 0.1 + 0.2;
  ExperimentConfig cfg = parse_config("[team0]\nalpha = " + fmt_double(awkward) + "\n");
  CHECK(cfg.teams[0].params.alpha == awkward);
}
