#include "sic/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "sic/env/matrix_game.hpp"
#include "sic/env/particle.hpp"
#include "sic/errors.hpp"

namespace sic {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Rpsw1Step: return "rpsw-1step";
    case Scenario::Rpsw4Step: return "rpsw-4step";
    case Scenario::PredatorPrey: return "predator-prey";
  }
  throw ConfigError("unknown scenario value");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::IndRe: return "ind-re";
    case Algorithm::SicRe: return "sic-re";
    case Algorithm::Maddpg: return "maddpg";
    case Algorithm::SicMa: return "sic-ma";
    case Algorithm::Coma: return "coma";
    case Algorithm::SicComa: return "sic-coma";
  }
  throw ConfigError("unknown algorithm value");
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "rpsw-1step") return Scenario::Rpsw1Step;
  if (s == "rpsw-4step") return Scenario::Rpsw4Step;
  if (s == "predator-prey") return Scenario::PredatorPrey;
  throw ConfigError("unknown scenario \"" + s + "\"");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ind-re") return Algorithm::IndRe;
  if (s == "sic-re") return Algorithm::SicRe;
  if (s == "maddpg") return Algorithm::Maddpg;
  if (s == "sic-ma") return Algorithm::SicMa;
  if (s == "coma") return Algorithm::Coma;
  if (s == "sic-coma") return Algorithm::SicComa;
  throw ConfigError("unknown algorithm \"" + s + "\"");
}

bool algorithm_is_sic(Algorithm a) {
  return a == Algorithm::SicRe || a == Algorithm::SicMa || a == Algorithm::SicComa;
}

bool algorithm_needs_replay(Algorithm a) {
  return a == Algorithm::Maddpg || a == Algorithm::SicMa;
}

PolicyMode algorithm_policy_mode(Algorithm a) {
  return algorithm_needs_replay(a) ? PolicyMode::DeterministicGumbel
                                   : PolicyMode::StochasticSoftmax;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected a number, got \"" + v + "\"");
  return d;
}

long long parse_ll(const std::string& key, const std::string& v) {
  char* end = nullptr;
  long long n = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected an integer, got \"" + v + "\"");
  return n;
}

int parse_int(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_ll(key, v));
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key \"" + key + "\": expected an unsigned integer, got \"" + v + "\"");
  return n;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key \"" + key + "\": expected true/false, got \"" + v + "\"");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_int(key, trim(part)));
  if (out.empty()) throw ConfigError("key \"" + key + "\": expected a comma-separated list");
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i]);
  }
  return s;
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> split_sections(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      current = trim(line.substr(1, line.size() - 2));
      if (current != "team0" && current != "team1")
        throw ConfigError("unknown section [" + current + "]");
      sections[current];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in line: " + line);
    Section& sec = sections[current];
    if (sec.count(key)) throw ConfigError("duplicate key \"" + key + "\"");
    sec[key] = value;
  }
  return sections;
}

TrainParams scenario_defaults(Scenario s) {
  TrainParams p;
  if (s == Scenario::PredatorPrey) {
    p.lr = 1e-3;
    p.gamma = 0.95;
    p.lambda = 0.8;
    p.batch_size = 256;
    p.clip_norm = 0.5;
    p.warmup = 1024;
    p.update_every = 25;
    p.policy_hidden = {64, 64};
    p.critic_hidden = {64, 64};
    p.unet_hidden = {64};
  } else {
    p.lr = 1e-4;
    p.gamma = 0.99;
    p.lambda = 0.8;
    p.batch_size = 32;
    p.clip_norm = 0.0;
    p.policy_hidden = {8};
    p.critic_hidden = {8, 8};
    p.unet_hidden = {8, 8};
  }
  return p;
}

void apply_algorithm_defaults(TrainParams& p, Algorithm a, Scenario s, int team_size) {
  bool matrix = s != Scenario::PredatorPrey;
  switch (a) {
    case Algorithm::IndRe:
    case Algorithm::Maddpg:
      p.dz = 0;
      p.alpha = 0.0;
      break;
    case Algorithm::SicRe:
      p.dz = matrix ? 2 : 20;
      p.alpha = matrix ? 0.01 : 1e-4;
      if (!matrix) p.lr = 5e-4;
      break;
    case Algorithm::SicMa:
      p.dz = matrix ? 2 : 20;
      p.alpha = matrix ? 0.01 : 1e-4;
      p.lr = 5e-4;
      break;
    case Algorithm::Coma:
      p.dz = 0;
      p.alpha = 0.0;
      p.lr = 5e-5;
      p.clip_norm = 0.1;
      p.gamma = 0.99;
      p.lambda = 0.8;
      p.batch_size = 1000;
      break;
    case Algorithm::SicComa:
      p.dz = matrix ? 2 : 20;
      p.alpha = matrix ? 0.01 : 1e-4;
      p.lr = 5e-5;
      p.clip_norm = 0.1;
      p.gamma = 0.99;
      p.lambda = 0.8;
      p.batch_size = 1000;
      break;
  }
  if (s == Scenario::PredatorPrey && team_size == 4 &&
      (a == Algorithm::Maddpg || a == Algorithm::SicMa)) {
    p.lr = 5e-4;
    if (a == Algorithm::SicMa) p.alpha = 0.01;
  }
}

void apply_team_key(TeamConfig& tc, const std::string& key, const std::string& v) {
  TrainParams& p = tc.params;
  if (key == "algorithm" || key == "freeze") return;  // handled in the first pass
  if (key == "lr") p.lr = parse_double(key, v);
  else if (key == "lr_critic") p.lr_critic = parse_double(key, v);
  else if (key == "lr_unet") p.lr_unet = parse_double(key, v);
  else if (key == "alpha") p.alpha = parse_double(key, v);
  else if (key == "entropy") p.entropy = parse_double(key, v);
  else if (key == "dz") p.dz = parse_int(key, v);
  else if (key == "gamma") p.gamma = parse_double(key, v);
  else if (key == "lambda") p.lambda = parse_double(key, v);
  else if (key == "batch_size") p.batch_size = parse_int(key, v);
  else if (key == "clip_norm") p.clip_norm = parse_double(key, v);
  else if (key == "gumbel_tau") p.gumbel_tau = parse_double(key, v);
  else if (key == "target_rate") p.target_rate = parse_double(key, v);
  else if (key == "warmup") p.warmup = parse_int(key, v);
  else if (key == "update_every") p.update_every = parse_int(key, v);
  else if (key == "eps_start") p.eps_start = parse_double(key, v);
  else if (key == "eps_end") p.eps_end = parse_double(key, v);
  else if (key == "policy_hidden") p.policy_hidden = parse_int_list(key, v);
  else if (key == "critic_hidden") p.critic_hidden = parse_int_list(key, v);
  else if (key == "unet_hidden") p.unet_hidden = parse_int_list(key, v);
  else if (key == "critic_signal") p.critic_signal = parse_bool(key, v);
  else throw ConfigError("unknown key \"" + key + "\" in team section");
}

void validate_team(const TeamConfig& tc, Scenario s, int team) {
  const TrainParams& p = tc.params;
  std::string where = " (team" + std::to_string(team) + ")";
  if (p.lr <= 0.0) throw ConfigError("key \"lr\": must be positive" + where);
  if (p.lr_critic < 0.0) throw ConfigError("key \"lr_critic\": must be >= 0" + where);
  if (p.lr_unet < 0.0) throw ConfigError("key \"lr_unet\": must be >= 0" + where);
  if (p.alpha < 0.0) throw ConfigError("key \"alpha\": must be >= 0" + where);
  if (p.entropy < 0.0) throw ConfigError("key \"entropy\": must be >= 0" + where);
  if (p.dz < 0) throw ConfigError("key \"dz\": must be >= 0" + where);
  if (p.gamma < 0.0 || p.gamma >= 1.0)
    throw ConfigError("key \"gamma\": must be in [0,1)" + where);
  if (p.lambda < 0.0 || p.lambda > 1.0)
    throw ConfigError("key \"lambda\": must be in [0,1]" + where);
  if (p.batch_size < 1) throw ConfigError("key \"batch_size\": must be >= 1" + where);
  if (p.clip_norm < 0.0) throw ConfigError("key \"clip_norm\": must be >= 0" + where);
  if (p.gumbel_tau <= 0.0) throw ConfigError("key \"gumbel_tau\": must be positive" + where);
  if (p.target_rate <= 0.0 || p.target_rate > 1.0)
    throw ConfigError("key \"target_rate\": must be in (0,1]" + where);
  if (p.warmup < 0) throw ConfigError("key \"warmup\": must be >= 0" + where);
  if (p.update_every < 1) throw ConfigError("key \"update_every\": must be >= 1" + where);
  if (p.eps_start < 0.0 || p.eps_start > 1.0 || p.eps_end < 0.0 || p.eps_end > 1.0)
    throw ConfigError("keys \"eps_start\"/\"eps_end\": must be in [0,1]" + where);
  for (int h : p.policy_hidden)
    if (h < 1) throw ConfigError("key \"policy_hidden\": sizes must be >= 1" + where);
  for (int h : p.critic_hidden)
    if (h < 1) throw ConfigError("key \"critic_hidden\": sizes must be >= 1" + where);
  for (int h : p.unet_hidden)
    if (h < 1) throw ConfigError("key \"unet_hidden\": sizes must be >= 1" + where);
  if (!algorithm_is_sic(tc.algorithm) && tc.freeze_checkpoint.empty()) {
    if (p.dz != 0)
      throw ConfigError("key \"dz\": " + to_string(tc.algorithm) + " takes no signal" + where);
    if (p.alpha != 0.0)
      throw ConfigError("key \"alpha\": " + to_string(tc.algorithm) + " has no MI term" + where);
  }
  if (p.entropy != 0.0 &&
      (tc.algorithm == Algorithm::Maddpg || tc.algorithm == Algorithm::SicMa))
    throw ConfigError("key \"entropy\": " + to_string(tc.algorithm) +
                      " trains deterministic policies" + where);
  if (algorithm_needs_replay(tc.algorithm) && s != Scenario::PredatorPrey)
    throw ConfigError(to_string(tc.algorithm) + " requires the predator-prey scenario" + where);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections = split_sections(text);
  ExperimentConfig cfg;

  Section global = sections.count("") ? sections[""] : Section{};
  auto take = [&global](const char* key) -> const std::string* {
    auto it = global.find(key);
    return it == global.end() ? nullptr : &it->second;
  };

  if (const std::string* v = take("scenario")) cfg.scenario = scenario_from_string(*v);
  bool matrix = cfg.scenario != Scenario::PredatorPrey;
  cfg.episodes = matrix ? 100000 : 3000;
  if (const std::string* v = take("seed")) cfg.seed = parse_u64("seed", *v);
  if (const std::string* v = take("episodes")) cfg.episodes = parse_ll("episodes", *v);
  if (const std::string* v = take("out")) cfg.out_dir = *v;
  if (const std::string* v = take("metrics_every")) cfg.metrics_every = parse_int("metrics_every", *v);
  if (const std::string* v = take("checkpoint_every"))
    cfg.checkpoint_every = parse_int("checkpoint_every", *v);
  if (const std::string* v = take("checkpoint_replay"))
    cfg.checkpoint_replay = parse_bool("checkpoint_replay", *v);
  if (const std::string* v = take("replay_capacity"))
    cfg.replay_capacity = parse_int("replay_capacity", *v);
  if (const std::string* v = take("rounds")) cfg.rounds = parse_int("rounds", *v);
  if (const std::string* v = take("team_size")) cfg.team_size = parse_int("team_size", *v);
  if (const std::string* v = take("landmarks")) cfg.landmarks = parse_int("landmarks", *v);

  static const char* known_global[] = {"scenario", "seed", "episodes", "out", "metrics_every",
                                       "checkpoint_every", "checkpoint_replay", "replay_capacity",
                                       "rounds", "team_size", "landmarks"};
  for (const auto& kv : global) {
    bool ok = false;
    for (const char* k : known_global) ok = ok || kv.first == k;
    if (!ok) throw ConfigError("unknown key \"" + kv.first + "\"");
  }

  if (cfg.episodes < 1) throw ConfigError("key \"episodes\": must be >= 1");
  if (cfg.metrics_every < 1) throw ConfigError("key \"metrics_every\": must be >= 1");
  if (cfg.checkpoint_every < 0) throw ConfigError("key \"checkpoint_every\": must be >= 0");
  if (cfg.rounds < 1) throw ConfigError("key \"rounds\": must be >= 1");
  if (cfg.team_size < 1) throw ConfigError("key \"team_size\": must be >= 1");
  if (cfg.landmarks < 0) throw ConfigError("key \"landmarks\": must be >= 0");
  if (cfg.replay_capacity < 1) throw ConfigError("key \"replay_capacity\": must be >= 1");

  cfg.teams.resize(2);
  for (int t = 0; t < 2; ++t) {
    TeamConfig& tc = cfg.teams[static_cast<size_t>(t)];
    std::string name = "team" + std::to_string(t);
    Section sec = sections.count(name) ? sections[name] : Section{};

    tc.algorithm = matrix ? Algorithm::SicRe : Algorithm::Maddpg;
    if (sec.count("algorithm")) tc.algorithm = algorithm_from_string(sec["algorithm"]);
    if (sec.count("freeze")) tc.freeze_checkpoint = sec["freeze"];

    tc.params = scenario_defaults(cfg.scenario);
    apply_algorithm_defaults(tc.params, tc.algorithm, cfg.scenario, cfg.team_size);
    for (const auto& kv : sec) apply_team_key(tc, kv.first, kv.second);
    tc.params.total_episodes = cfg.episodes;
    validate_team(tc, cfg.scenario, t);
    if (algorithm_needs_replay(tc.algorithm) && cfg.replay_capacity < tc.params.batch_size)
      throw ConfigError("key \"replay_capacity\": smaller than team" + std::to_string(t) +
                        " batch_size");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  s += "scenario = " + to_string(cfg.scenario) + "\n";
  s += "seed = " + std::to_string(cfg.seed) + "\n";
  s += "episodes = " + std::to_string(cfg.episodes) + "\n";
  s += "out = " + cfg.out_dir + "\n";
  s += "metrics_every = " + std::to_string(cfg.metrics_every) + "\n";
  s += "checkpoint_every = " + std::to_string(cfg.checkpoint_every) + "\n";
  s += std::string("checkpoint_replay = ") + (cfg.checkpoint_replay ? "true" : "false") + "\n";
  s += "replay_capacity = " + std::to_string(cfg.replay_capacity) + "\n";
  s += "rounds = " + std::to_string(cfg.rounds) + "\n";
  s += "team_size = " + std::to_string(cfg.team_size) + "\n";
  s += "landmarks = " + std::to_string(cfg.landmarks) + "\n";
  for (int t = 0; t < static_cast<int>(cfg.teams.size()); ++t) {
    const TeamConfig& tc = cfg.teams[static_cast<size_t>(t)];
    const TrainParams& p = tc.params;
    s += "\n[team" + std::to_string(t) + "]\n";
    s += "algorithm = " + to_string(tc.algorithm) + "\n";
    if (!tc.freeze_checkpoint.empty()) s += "freeze = " + tc.freeze_checkpoint + "\n";
    s += "lr = " + fmt_double(p.lr) + "\n";
    s += "lr_critic = " + fmt_double(p.lr_critic) + "\n";
    s += "lr_unet = " + fmt_double(p.lr_unet) + "\n";
    s += "alpha = " + fmt_double(p.alpha) + "\n";
    s += "dz = " + std::to_string(p.dz) + "\n";
    s += "gamma = " + fmt_double(p.gamma) + "\n";
    s += "lambda = " + fmt_double(p.lambda) + "\n";
    s += "batch_size = " + std::to_string(p.batch_size) + "\n";
    s += "clip_norm = " + fmt_double(p.clip_norm) + "\n";
    s += "gumbel_tau = " + fmt_double(p.gumbel_tau) + "\n";
    s += "target_rate = " + fmt_double(p.target_rate) + "\n";
    s += "warmup = " + std::to_string(p.warmup) + "\n";
    s += "update_every = " + std::to_string(p.update_every) + "\n";
    s += "eps_start = " + fmt_double(p.eps_start) + "\n";
    s += "eps_end = " + fmt_double(p.eps_end) + "\n";
    s += "policy_hidden = " + join_ints(p.policy_hidden) + "\n";
    s += "critic_hidden = " + join_ints(p.critic_hidden) + "\n";
    s += "unet_hidden = " + join_ints(p.unet_hidden) + "\n";
    s += std::string("critic_signal = ") + (p.critic_signal ? "true" : "false") + "\n";
  }
  return s;
}

std::unique_ptr<env::Env> make_env(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::Rpsw1Step: return std::make_unique<env::OneStepRpsw>();
    case Scenario::Rpsw4Step: return std::make_unique<env::MultiStepRpsw>(cfg.rounds);
    case Scenario::PredatorPrey: {
      env::ParticleConfig pc;
      pc.team_size = cfg.team_size;
      pc.landmark_count = cfg.landmarks;
      return std::make_unique<env::ParticleWorld>(pc);
    }
  }
  throw ConfigError("unknown scenario");
}

TeamEnvView make_team_view(const env::Env& e, int team) {
  TeamEnvView v;
  v.team_id = team;
  v.episode_length = e.episode_length();
  for (int a = 0; a < e.agent_count(); ++a) {
    v.all_obs_dims.push_back(e.obs_dim(a));
    v.all_n_actions.push_back(e.action_count(a));
    if (e.team_of(a) == team) v.agents.push_back(a);
  }
  return v;
}

}  // namespace sic
