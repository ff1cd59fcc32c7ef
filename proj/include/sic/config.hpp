#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sic/algo/trainer.hpp"
#include "sic/env/env.hpp"

namespace sic {

enum class Scenario { Rpsw1Step, Rpsw4Step, PredatorPrey };
enum class Algorithm { IndRe, SicRe, Maddpg, SicMa, Coma, SicComa };

std::string to_string(Scenario s);
std::string to_string(Algorithm a);
Scenario scenario_from_string(const std::string& s);    // ConfigError on unknown
Algorithm algorithm_from_string(const std::string& s);  // ConfigError on unknown

bool algorithm_is_sic(Algorithm a);
bool algorithm_needs_replay(Algorithm a);
PolicyMode algorithm_policy_mode(Algorithm a);

struct TeamConfig {
  Algorithm algorithm = Algorithm::SicRe;
  TrainParams params;             // fully resolved after loading
  std::string freeze_checkpoint;  // non-empty: load this team frozen from the file
};

// A fully resolved experiment: every run is a pure function of this struct.
struct ExperimentConfig {
  Scenario scenario = Scenario::Rpsw1Step;
  std::vector<TeamConfig> teams;  // exactly two
  uint64_t seed = 1;
  long long episodes = 0;
  std::string out_dir = "runs/out";
  int metrics_every = 100;     // episodes per metrics row
  int checkpoint_every = 0;    // 0: only the final checkpoint
  bool checkpoint_replay = false;
  int replay_capacity = 1000000;
  int rounds = 4;              // multi-step matrix game length
  int team_size = 2;           // particle world: M vs M
  int landmarks = 2;
};

// Parses `key = value` lines with [team0]/[team1] section headers, fills
// scenario- and algorithm-keyed defaults, and validates. Unknown keys or
// sections, malformed values, and incompatible combinations raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);  // ConfigError when unreadable

// Canonical snapshot: parse_config(serialize_config(c)) reproduces c, and the
// serialization is byte-stable for checkpoint embedding.
std::string serialize_config(const ExperimentConfig& cfg);

std::unique_ptr<env::Env> make_env(const ExperimentConfig& cfg);
TeamEnvView make_team_view(const env::Env& e, int team);

// %.17g, locale-independent; shared by every text emitter so identical values
// always serialize to identical bytes.
std::string fmt_double(double v);

}  // namespace sic
