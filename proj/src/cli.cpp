#include "sic/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sic/checkpoint.hpp"
#include "sic/config.hpp"
#include "sic/errors.hpp"
#include "sic/eval/crossplay.hpp"
#include "sic/eval/probes.hpp"
#include "sic/eval/theory.hpp"
#include "sic/rng.hpp"
#include "sic/runner.hpp"

namespace sic {
namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << text;
  if (!out) throw ConfigError("write failed: " + path);
}

struct TrainArgs {
  std::string config;
  std::string checkpoint;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  long long episodes = 0;
  bool episodes_set = false;
  long long stop_after = 0;
};

int run_train(const TrainArgs& a) {
  std::unique_ptr<Runner> runner;
  if (!a.checkpoint.empty()) {
    runner = Runner::from_checkpoint(a.checkpoint, a.episodes_set ? a.episodes : 0, a.out);
  } else {
    ExperimentConfig cfg = load_config(a.config);
    if (a.seed_set) cfg.seed = a.seed;
    if (!a.out.empty()) cfg.out_dir = a.out;
    if (a.episodes_set) {
      if (a.episodes < 1) throw ConfigError("--episodes must be positive");
      cfg.episodes = a.episodes;
      for (auto& team : cfg.teams) team.params.total_episodes = a.episodes;
    }
    runner = std::make_unique<Runner>(cfg);
  }
  RunResult res = runner->run(a.stop_after);
  std::cout << "episodes trained: " << res.episodes_trained << "\n";
  std::cout << "total episodes:   " << runner->episode() << " / " << runner->config().episodes
            << "\n";
  for (size_t t = 0; t < res.mean_recent_reward.size(); ++t)
    std::cout << "recent reward t" << t << ":  " << fmt_double(res.mean_recent_reward[t]) << "\n";
  std::cout << "wall seconds:     " << fmt_double(res.wall_seconds) << "\n";
  std::cout << "checkpoint:       " << res.checkpoint_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string predator;
  std::string prey;
  int episodes = 500;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  bool greedy = false;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  CrossPlayResult res = cross_play(a.predator, a.prey, a.episodes, a.seeds,
                                   a.greedy ? ExecMode::Greedy : ExecMode::Sample);
  for (size_t i = 0; i < res.seeds.size(); ++i)
    std::cout << "seed " << res.seeds[i] << ": " << fmt_double(res.scores[i])
              << " collisions / 100 episodes\n";
  std::cout << "mean " << fmt_double(res.mean) << "  std " << fmt_double(res.stddev) << "\n";
  if (!a.out.empty()) {
    std::ostringstream csv;
    csv << "predator,prey,seed,score\n";
    for (size_t i = 0; i < res.seeds.size(); ++i)
      csv << res.predator_model << "," << res.prey_model << "," << res.seeds[i] << ","
          << fmt_double(res.scores[i]) << "\n";
    std::string path = a.out + "/crossplay.csv";
    write_text_file(path, csv.str());
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

struct ProbeArgs {
  std::string checkpoint;
  int team = 0;
  int signals = 2000;
  int samples = 20000;
  uint64_t seed = 1;
  std::string out = "runs/probe";
};

int run_probe(const ProbeArgs& a) {
  Checkpoint ck = load_checkpoint(a.checkpoint);
  ExperimentConfig cfg = parse_config(ck.config_text);
  if (cfg.scenario == Scenario::PredatorPrey)
    throw ConfigError("probe: signal partitions are defined for matrix-game checkpoints");
  if (a.team < 0 || a.team >= static_cast<int>(cfg.teams.size()))
    throw ConfigError("probe: --team out of range");
  cfg.teams[static_cast<size_t>(a.team)].freeze_checkpoint = a.checkpoint;
  auto environment = make_env(cfg);
  auto frozen = make_frozen_team(cfg, *environment, a.team);
  TeamEnvView view = make_team_view(*environment, a.team);

  std::vector<const Mlp*> policies;
  for (const PolicyHandle& h : frozen->policy_handles()) policies.push_back(h.net);
  int dz = frozen->signal_dim();
  std::vector<int> n_actions;
  for (int i = 0; i < view.size(); ++i) n_actions.push_back(view.n_actions(i));

  // One probe case per observation the policies can face: the one-step game
  // has a single constant state; the multi-step game conditions on each
  // matrix ID's one-hot.
  std::vector<std::pair<int, std::vector<std::vector<double>>>> cases;
  if (cfg.scenario == Scenario::Rpsw1Step) {
    cases.push_back({0, {std::vector<double>{1.0}, std::vector<double>{1.0}}});
  } else {
    for (int id = 1; id <= 4; ++id) {
      std::vector<double> obs(4, 0.0);
      obs[static_cast<size_t>(id - 1)] = 1.0;
      cases.push_back({id, {obs, obs}});
    }
  }

  Rng rng(derive_stream(a.seed, "probe"));
  std::ostringstream part_csv;
  part_csv << "matrix_id";
  for (int k = 0; k < dz; ++k) part_csv << ",z" << k;
  part_csv << ",joint_action\n";
  std::ostringstream freq_csv;
  freq_csv << "episode,matrix_id,p1,p2,p3,p4\n";

  for (const auto& [matrix_id, member_obs] : cases) {
    PartitionProbe zones = probe_signal_partition(policies, member_obs, n_actions, dz, a.signals,
                                                  rng, /*greedy=*/true);
    for (size_t i = 0; i < zones.signals.size(); ++i) {
      part_csv << matrix_id;
      for (double zv : zones.signals[i]) part_csv << "," << fmt_double(zv);
      part_csv << "," << zones.joint_actions[i] << "\n";
    }
    PartitionProbe sampled = probe_signal_partition(policies, member_obs, n_actions, dz, a.signals,
                                                    rng, /*greedy=*/false);
    int joint_count = 1;
    for (int k : n_actions) joint_count *= k;
    double mi = mutual_information_zbins(sampled.signals, sampled.joint_actions, joint_count);

    JointDistribution freq =
        joint_policy_frequencies(policies, member_obs, n_actions, dz, a.samples, rng);
    freq_csv << ck.episode << "," << matrix_id;
    for (double p : freq.probs) freq_csv << "," << fmt_double(p);
    freq_csv << "\n";

    std::cout << "matrix " << matrix_id << ": I(z; joint action) = " << fmt_double(mi)
              << " nats; zone frequencies";
    for (double f : zones.frequencies) std::cout << " " << fmt_double(f);
    std::cout << "\n";
  }

  write_text_file(a.out + "/partition.csv", part_csv.str());
  write_text_file(a.out + "/policyfreq.csv", freq_csv.str());
  std::cout << "wrote " << a.out << "/partition.csv and " << a.out << "/policyfreq.csv\n";
  return 0;
}

struct HeatmapArgs {
  std::string predator;
  std::string prey;
  int games = 1000;
  uint64_t seed = 1;
  std::string out = "runs/heatmap";
};

int run_heatmap(const HeatmapArgs& a) {
  HeatmapResult res = collision_heatmap(a.predator, a.prey, a.games, a.seed,
                                        a.out + "/collisions.csv");
  std::cout << res.total_collisions << " collisions over " << res.games
            << " games from one fixed layout\n";
  std::cout << "wrote " << res.csv_path << "\n";
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string prey;
  std::vector<int> dz{0, 5, 10, 20};
  std::vector<uint64_t> seeds{1, 2, 3};
  int eval_episodes = 500;
  std::string out = "runs/sweep";
};

int run_sweep(const SweepArgs& a) {
  ExperimentConfig base = load_config(a.config);
  SweepResult res = sensitivity_sweep(a.dz, base, a.prey, a.seeds, a.eval_episodes, a.out);
  for (size_t i = 0; i < res.dz_values.size(); ++i)
    std::cout << "dz " << res.dz_values[i] << ": mean " << fmt_double(res.means[i]) << "  std "
              << fmt_double(res.stddevs[i]) << "\n";
  std::cout << "wrote " << a.out << "/sweep.csv\n";
  return 0;
}

struct TheoryArgs {
  long long signals = 1000000;
  uint64_t seed = 1;
};

int check_line(const std::string& label, double got, double want, double tol) {
  bool ok = std::abs(got - want) <= tol;
  std::cout << label << ": " << fmt_double(got) << " (expect " << fmt_double(want) << " +- "
            << fmt_double(tol) << ") " << (ok ? "[ok]" : "[bad]") << "\n";
  return ok ? 0 : 1;
}

int check_bound(const std::string& label, double got, double bound) {
  bool ok = got <= bound;
  std::cout << label << ": " << fmt_double(got) << " (bound " << fmt_double(bound) << ") "
            << (ok ? "[ok]" : "[bad]") << "\n";
  return ok ? 0 : 1;
}

int run_theory(const TheoryArgs& a) {
  if (a.signals < 1) throw ConfigError("theory-check: --signals must be positive");
  int bad = 0;

  // A genuine product of marginals factorizes exactly.
  JointDistribution prod{{0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4}, 2, 2, 0};
  bad += check_line("product fit, independent 0.3/0.6 play", product_fit(prod).error, 0.0, 1e-6);

  // The perfectly correlated joint: no product comes closer than 0.5.
  JointDistribution diag{{0.5, 0.0, 0.0, 0.5}, 2, 2, 0};
  ProductFit fit = product_fit(diag);
  bad += check_line("product fit, correlated diag(0.5, 0.5)", fit.error, 0.5, 1e-3);

  // Yet a shared 1-D signal realizes that joint (and any other) exactly.
  double bound = 2.0 / std::sqrt(static_cast<double>(a.signals));
  Rng diag_rng(derive_stream(a.seed, "theory.diag"));
  RealizationResult dr = signal_realization_check(diag, a.signals, diag_rng);
  bad += check_bound("signal realization, diag(0.5, 0.5)", dr.error, bound);

  JointDistribution thirds{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0}, 2, 2, 0};
  Rng thirds_rng(derive_stream(a.seed, "theory.thirds"));
  RealizationResult tr = signal_realization_check(thirds, a.signals, thirds_rng);
  bad += check_bound("signal realization, (1/3, 1/3, 1/3, 0)", tr.error, bound);

  std::cout << (bad == 0 ? "all theory checks passed\n" : "theory checks FAILED\n");
  return bad == 0 ? 0 : 2;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"multi-agent coordination-signal training toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train (or resume) one experiment");
  CLI::Option* cfg_opt = train_cmd->add_option("--config", train.config, "experiment config file");
  CLI::Option* ckpt_opt =
      train_cmd->add_option("--checkpoint", train.checkpoint, "checkpoint to resume from");
  CLI::Option* seed_opt = train_cmd->add_option("--seed", train.seed, "master seed override");
  train_cmd->add_option("--out", train.out, "output directory override");
  CLI::Option* ep_opt =
      train_cmd->add_option("--episodes", train.episodes, "episode budget override");
  train_cmd->add_option("--stop-after", train.stop_after,
                        "pause after this many episodes (0 = run to completion)");
  ckpt_opt->excludes(cfg_opt);
  ckpt_opt->excludes(seed_opt);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "cross-play two frozen checkpoints");
  eval_cmd->add_option("--predator", eval.predator, "predator-side checkpoint")->required();
  eval_cmd->add_option("--prey", eval.prey, "prey-side checkpoint")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "episodes per seed");
  eval_cmd->add_option("--seeds", eval.seeds, "evaluation seeds")->delimiter(',');
  eval_cmd->add_flag("--greedy", eval.greedy, "argmax execution instead of sampling");
  eval_cmd->add_option("--out", eval.out, "directory for crossplay.csv");

  ProbeArgs probe;
  CLI::App* probe_cmd =
      app.add_subcommand("probe", "map a team's signal partition and joint-action frequencies");
  probe_cmd->add_option("--checkpoint", probe.checkpoint, "matrix-game checkpoint")->required();
  probe_cmd->add_option("--team", probe.team, "team slot to probe");
  probe_cmd->add_option("--signals", probe.signals, "signal draws per probe");
  probe_cmd->add_option("--samples", probe.samples, "Monte-Carlo samples per frequency table");
  probe_cmd->add_option("--seed", probe.seed, "probe seed");
  probe_cmd->add_option("--out", probe.out, "output directory");

  HeatmapArgs heat;
  CLI::App* heat_cmd =
      app.add_subcommand("heatmap", "collision positions over repeats of one fixed layout");
  heat_cmd->add_option("--predator", heat.predator, "predator-side checkpoint")->required();
  heat_cmd->add_option("--prey", heat.prey, "prey-side checkpoint")->required();
  heat_cmd->add_option("--games", heat.games, "repeated games");
  heat_cmd->add_option("--seed", heat.seed, "layout/evaluation seed");
  heat_cmd->add_option("--out", heat.out, "output directory");

  SweepArgs sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "signal-dimension sensitivity sweep against frozen preys");
  sweep_cmd->add_option("--config", sweep.config, "base predator-prey config")->required();
  sweep_cmd->add_option("--prey", sweep.prey, "frozen prey checkpoint")->required();
  sweep_cmd->add_option("--dz", sweep.dz, "signal dimensions to sweep")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "training seeds per dimension")->delimiter(',');
  sweep_cmd->add_option("--eval-episodes", sweep.eval_episodes, "cross-play episodes per cell");
  sweep_cmd->add_option("--out", sweep.out, "output directory");

  TheoryArgs theory;
  CLI::App* theory_cmd = app.add_subcommand(
      "theory-check", "verify the product-fit and signal-realization primitives");
  theory_cmd->add_option("--signals", theory.signals, "realization probe draws");
  theory_cmd->add_option("--seed", theory.seed, "probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) {
      if (train.config.empty() && train.checkpoint.empty())
        throw ConfigError("train: pass --config for a fresh run or --checkpoint to resume");
      train.seed_set = seed_opt->count() > 0;
      train.episodes_set = ep_opt->count() > 0;
      return run_train(train);
    }
    if (*eval_cmd) return run_eval(eval);
    if (*probe_cmd) return run_probe(probe);
    if (*heat_cmd) return run_heatmap(heat);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*theory_cmd) return run_theory(theory);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sic
