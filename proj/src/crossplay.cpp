#include "sic/eval/crossplay.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sic/checkpoint.hpp"
#include "sic/env/particle.hpp"
#include "sic/errors.hpp"
#include "sic/runner.hpp"

namespace sic {

namespace {

struct FrozenPair {
  ExperimentConfig cfg;  // predator run's config with both teams frozen
  std::unique_ptr<env::Env> env;
  std::unique_ptr<FrozenTeam> predators;
  std::unique_ptr<FrozenTeam> preys;
};

FrozenPair load_pair(const std::string& predator_ckpt, const std::string& prey_ckpt) {
  ExperimentConfig pcfg = parse_config(load_checkpoint(predator_ckpt).config_text);
  ExperimentConfig qcfg = parse_config(load_checkpoint(prey_ckpt).config_text);
  if (pcfg.scenario != Scenario::PredatorPrey || qcfg.scenario != Scenario::PredatorPrey)
    throw ConfigError("cross_play: both checkpoints must come from predator-prey runs");
  if (pcfg.team_size != qcfg.team_size || pcfg.landmarks != qcfg.landmarks)
    throw ConfigError("cross_play: checkpoints disagree on the arena shape");

  FrozenPair pair;
  pair.cfg = pcfg;
  pair.cfg.teams[0].freeze_checkpoint = predator_ckpt;
  pair.cfg.teams[1].freeze_checkpoint = prey_ckpt;
  pair.env = make_env(pair.cfg);
  pair.predators = make_frozen_team(pair.cfg, *pair.env, 0);
  pair.preys = make_frozen_team(pair.cfg, *pair.env, 1);
  return pair;
}

std::vector<PolicyHandle> joint_handles(const FrozenPair& pair) {
  std::vector<PolicyHandle> handles(static_cast<size_t>(pair.env->agent_count()));
  for (const FrozenTeam* team : {pair.predators.get(), pair.preys.get()}) {
    std::vector<PolicyHandle> th = team->policy_handles();
    const TeamEnvView& v = team->view();
    for (int i = 0; i < v.size(); ++i)
      handles[static_cast<size_t>(v.agents[static_cast<size_t>(i)])] =
          th[static_cast<size_t>(i)];
  }
  return handles;
}

void mean_and_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  sd = 0.0;
  if (xs.size() > 1) {
    for (double x : xs) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
  }
}

}  // namespace

CrossPlayResult cross_play(const std::string& predator_ckpt, const std::string& prey_ckpt,
                           int n_episodes, const std::vector<uint64_t>& seeds, ExecMode exec) {
  if (n_episodes < 1) throw ParameterError("cross_play: n_episodes must be >= 1");
  if (seeds.empty()) throw ParameterError("cross_play: at least one seed required");

  FrozenPair pair = load_pair(predator_ckpt, prey_ckpt);
  std::vector<PolicyHandle> handles = joint_handles(pair);
  const int n = pair.env->agent_count();
  const int teams = pair.env->team_count();

  CrossPlayResult out;
  out.predator_model = predator_ckpt;
  out.prey_model = prey_ckpt;
  out.seeds = seeds;

  for (uint64_t seed : seeds) {
    Rng env_rng(derive_stream(seed, "eval.env"));
    std::vector<Rng> signal_rngs;
    for (int t = 0; t < teams; ++t)
      signal_rngs.emplace_back(derive_stream(seed, "eval.signal.t" + std::to_string(t)));
    std::vector<Rng> action_rngs;
    for (int a = 0; a < n; ++a)
      action_rngs.emplace_back(derive_stream(seed, "eval.act.a" + std::to_string(a)));

    RolloutSpec spec;
    spec.env = pair.env.get();
    spec.policies = handles;
    spec.exec = exec;
    spec.env_rng = &env_rng;
    for (Rng& r : signal_rngs) spec.signal_rngs.push_back(&r);
    for (Rng& r : action_rngs) spec.action_rngs.push_back(&r);

    long long collisions = 0;
    for (int e = 0; e < n_episodes; ++e) {
      Trajectory traj = run_episode(spec);
      for (const TrajStep& s : traj.steps) collisions += static_cast<long long>(s.events.size());
    }
    out.scores.push_back(static_cast<double>(collisions) * 100.0 /
                         static_cast<double>(n_episodes));
  }

  mean_and_std(out.scores, out.mean, out.stddev);
  return out;
}

HeatmapResult collision_heatmap(const std::string& predator_ckpt, const std::string& prey_ckpt,
                                int n_games, uint64_t seed, const std::string& out_csv) {
  if (n_games < 1) throw ParameterError("collision_heatmap: n_games must be >= 1");

  FrozenPair pair = load_pair(predator_ckpt, prey_ckpt);
  std::vector<PolicyHandle> handles = joint_handles(pair);
  auto* world = dynamic_cast<env::ParticleWorld*>(pair.env.get());
  if (!world) throw ConfigError("collision_heatmap: checkpoints are not particle-world runs");
  const int n = world->agent_count();
  const int teams = world->team_count();

  // one layout for every game
  Rng layout_rng(derive_stream(seed, "eval.layout"));
  world->reset(layout_rng);
  const std::vector<env::Vec2> pos = world->agent_positions();
  const std::vector<env::Vec2> vel = world->agent_velocities();
  const std::vector<env::Vec2> landmarks = world->landmark_positions();

  Rng env_rng(derive_stream(seed, "eval.env"));  // unused while reset_env is off
  std::vector<Rng> signal_rngs;
  for (int t = 0; t < teams; ++t)
    signal_rngs.emplace_back(derive_stream(seed, "eval.signal.t" + std::to_string(t)));
  std::vector<Rng> action_rngs;
  for (int a = 0; a < n; ++a)
    action_rngs.emplace_back(derive_stream(seed, "eval.act.a" + std::to_string(a)));

  RolloutSpec spec;
  spec.env = world;
  spec.policies = handles;
  spec.exec = ExecMode::Sample;
  spec.env_rng = &env_rng;
  spec.reset_env = false;
  for (Rng& r : signal_rngs) spec.signal_rngs.push_back(&r);
  for (Rng& r : action_rngs) spec.action_rngs.push_back(&r);

  if (!out_csv.empty()) {
    std::filesystem::path parent = std::filesystem::path(out_csv).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
  }
  std::ofstream csv(out_csv, std::ios::binary);
  if (!csv) throw ConfigError("collision_heatmap: cannot write " + out_csv);
  csv << "episode,step,predator_id,prey_id,x,y\n";

  HeatmapResult res;
  res.games = n_games;
  res.csv_path = out_csv;
  for (int g = 0; g < n_games; ++g) {
    world->set_state(pos, vel, landmarks);
    Trajectory traj = run_episode(spec);
    for (int t = 0; t < traj.length(); ++t)
      for (const env::CollisionEvent& ev : traj.steps[static_cast<size_t>(t)].events) {
        csv << g << ',' << t << ',' << ev.predator << ',' << ev.prey << ','
            << fmt_double(ev.x) << ',' << fmt_double(ev.y) << '\n';
        res.total_collisions += 1;
      }
  }
  csv.flush();
  if (!csv) throw ConfigError("collision_heatmap: short write on " + out_csv);
  return res;
}

SweepResult sensitivity_sweep(const std::vector<int>& dz_list, const ExperimentConfig& base,
                              const std::string& prey_ckpt, const std::vector<uint64_t>& seeds,
                              int eval_episodes, const std::string& out_dir) {
  if (dz_list.empty()) throw ParameterError("sensitivity_sweep: empty D_z list");
  for (int dz : dz_list)
    if (dz < 0) throw ConfigError("sensitivity_sweep: negative D_z");
  if (seeds.empty()) throw ParameterError("sensitivity_sweep: at least one seed required");
  if (eval_episodes < 1) throw ParameterError("sensitivity_sweep: eval_episodes must be >= 1");
  if (base.scenario != Scenario::PredatorPrey)
    throw ConfigError("sensitivity_sweep: base config must be a predator-prey experiment");

  SweepResult out;
  for (int dz : dz_list) {
    std::vector<double> scores;
    for (uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      cfg.teams[0].algorithm = Algorithm::SicMa;
      cfg.teams[0].params.dz = dz;
      if (dz == 0) cfg.teams[0].params.alpha = 0.0;
      cfg.teams[1] = TeamConfig{};
      cfg.teams[1].algorithm = Algorithm::Maddpg;
      cfg.teams[1].freeze_checkpoint = prey_ckpt;
      cfg.out_dir = out_dir + "/dz" + std::to_string(dz) + "_s" + std::to_string(seed);

      Runner runner(cfg);
      RunResult run = runner.run();
      CrossPlayResult cp = cross_play(run.checkpoint_path, prey_ckpt, eval_episodes, {seed});
      out.cells.push_back({dz, seed, cp.scores[0]});
      scores.push_back(cp.scores[0]);
    }
    double mean = 0.0, sd = 0.0;
    mean_and_std(scores, mean, sd);
    out.dz_values.push_back(dz);
    out.means.push_back(mean);
    out.stddevs.push_back(sd);
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/sweep.csv", std::ios::binary);
  if (!csv) throw ConfigError("sensitivity_sweep: cannot write " + out_dir + "/sweep.csv");
  csv << "dz,seed,score\n";
  for (const SweepCell& c : out.cells)
    csv << c.dz << ',' << c.seed << ',' << fmt_double(c.score) << '\n';
  return out;
}

}  // namespace sic
