// Acceptance gate: every release criterion is exercised end to end and
// reported as one [PASS]/[FAIL] line. Training cells are cached under the
// work directory (keyed by their canonical config) so reruns only retrain
// what changed; pass --criterion N to run a subset, --workdir to relocate
// the cache.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sic/algo/rollout.hpp"
#include "sic/algo/trainer.hpp"
#include "sic/checkpoint.hpp"
#include "sic/config.hpp"
#include "sic/errors.hpp"
#include "sic/eval/crossplay.hpp"
#include "sic/eval/probes.hpp"
#include "sic/eval/theory.hpp"
#include "sic/gumbel.hpp"
#include "sic/mlp.hpp"
#include "sic/rng.hpp"
#include "sic/runner.hpp"
#include "sic/signal.hpp"
#include "sic/tape.hpp"

namespace fs = std::filesystem;
using namespace sic;

namespace {

// ---------------------------------------------------------------------------
// Reporting helpers

struct Gate {
  bool ok = true;
  void require(bool cond, const std::string& what) {
    std::printf("    %s  %s\n", cond ? "ok " : "BAD", what.c_str());
    std::fflush(stdout);
    if (!cond) ok = false;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs), acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double pooled_std(const std::vector<double>& a, const std::vector<double>& b) {
  double sa = sample_std(a), sb = sample_std(b);
  return std::sqrt((sa * sa + sb * sb) / 2.0);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> onehot(int n, int k) {
  std::vector<double> v(static_cast<size_t>(n), 0.0);
  v[static_cast<size_t>(k)] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Cached training cells

struct Cell {
  std::string dir;      // <work>/<name>
  std::string ckpt;     // final checkpoint path
  std::string metrics;  // metrics.csv path
  std::map<std::string, double> summary;
};

std::map<std::string, double> parse_summary(const std::string& path) {
  std::map<std::string, double> out;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    size_t eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
  }
  return out;
}

// Trains the experiment described by `cfg_text` under <work>/<name>, or
// reuses the finished run when its canonical config matches the cached one.
Cell cached_run(const std::string& work, const std::string& name, const std::string& cfg_text) {
  Cell cell;
  cell.dir = work + "/" + name;
  std::string run_dir = cell.dir + "/run";
  cell.ckpt = run_dir + "/checkpoint_final.txt";
  cell.metrics = run_dir + "/metrics.csv";

  ExperimentConfig cfg = parse_config(cfg_text);
  cfg.out_dir = run_dir;
  std::string canon = serialize_config(cfg);

  std::string done_path = cell.dir + "/done.txt";
  bool reuse = fs::exists(done_path) && fs::exists(cell.ckpt) && slurp(done_path) == canon;
  if (!reuse) {
    std::printf("    ... training cell %s (%lld episodes)\n", name.c_str(), cfg.episodes);
    std::fflush(stdout);
    fs::remove_all(cell.dir);
    fs::create_directories(cell.dir);
    Runner runner(cfg);
    runner.run();
    std::ofstream done(done_path, std::ios::binary);
    done << canon;
  }
  cell.summary = parse_summary(run_dir + "/summary.txt");
  return cell;
}

// ---------------------------------------------------------------------------
// Checkpoint probing helpers

struct LoadedTeam {
  std::vector<Mlp> nets;
  int dz = 0;
  ExperimentConfig cfg;
};

LoadedTeam load_team_policies(const std::string& ckpt_path, int team) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  LoadedTeam out;
  out.cfg = parse_config(ck.config_text);
  out.dz = out.cfg.teams[static_cast<size_t>(team)].params.dz;
  std::string prefix = "t" + std::to_string(team) + ".a";
  for (int i = 0;; ++i) {
    std::string name = prefix + std::to_string(i) + ".policy";
    const Checkpoint::NetBlock* blk = nullptr;
    for (const auto& nb : ck.nets)
      if (nb.name == name) blk = &nb;
    if (!blk) break;
    out.nets.push_back(instantiate_net(*blk));
  }
  return out;
}

std::vector<const Mlp*> net_ptrs(const LoadedTeam& team) {
  std::vector<const Mlp*> out;
  for (const Mlp& n : team.nets) out.push_back(&n);
  return out;
}

// Fresh trajectories played by both teams' frozen checkpointed policies, with
// hidden vectors recorded for reconstruction checks.
std::vector<Trajectory> heldout_episodes(const std::string& ckpt, int n, uint64_t seed) {
  Checkpoint ck = load_checkpoint(ckpt);
  ExperimentConfig cfg = parse_config(ck.config_text);
  for (auto& tc : cfg.teams) tc.freeze_checkpoint = ckpt;
  auto environment = make_env(cfg);
  auto f0 = make_frozen_team(cfg, *environment, 0);
  auto f1 = make_frozen_team(cfg, *environment, 1);

  Rng env_rng(derive_stream(seed, "env"));
  Rng sig0(derive_stream(seed, "sig0"));
  Rng sig1(derive_stream(seed, "sig1"));
  std::vector<Rng> action_rngs;
  for (int a = 0; a < environment->agent_count(); ++a)
    action_rngs.emplace_back(derive_stream(seed, "act" + std::to_string(a)));

  RolloutSpec spec;
  spec.env = environment.get();
  spec.policies = f0->policy_handles();
  for (const PolicyHandle& h : f1->policy_handles()) spec.policies.push_back(h);
  spec.exec = ExecMode::Sample;
  spec.env_rng = &env_rng;
  spec.signal_rngs = {&sig0, &sig1};
  for (Rng& r : action_rngs) spec.action_rngs.push_back(&r);
  spec.record_hiddens = true;

  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) out.push_back(run_episode(spec));
  return out;
}

const Checkpoint::NetBlock& find_net_block(const Checkpoint& ck, const std::string& name) {
  for (const auto& nb : ck.nets)
    if (nb.name == name) return nb;
  throw CheckpointError("net block not found: " + name);
}

// ---------------------------------------------------------------------------
// Config builders

std::string matrix_cfg(const std::string& scenario, uint64_t seed, const std::string& t0,
                       const std::string& t1, long long episodes = 100000) {
  return "scenario = " + scenario + "\n" +
         "episodes = " + std::to_string(episodes) + "\n" +
         "seed = " + std::to_string(seed) + "\n" +
         "[team0]\n" + t0 + "[team1]\n" + t1;
}

std::string pp_cfg(uint64_t seed, const std::string& t0, const std::string& t1,
                   long long episodes = 3000) {
  return "scenario = predator-prey\n"
         "episodes = " + std::to_string(episodes) + "\n" +
         "seed = " + std::to_string(seed) + "\n" +
         "[team0]\n" + t0 + "[team1]\n" + t1;
}

// ---------------------------------------------------------------------------
// Criterion 1: closest-product-distribution and signal-realization primitives.

bool criterion1(const std::string&) {
  Gate g;
  auto start = std::chrono::steady_clock::now();

  // Perfectly correlated diagonal play. The library's answer must match an
  // independent brute-force grid over both marginals.
  JointDistribution diag{{0.5, 0.0, 0.0, 0.5}, 2, 2, 0};
  ProductFit fit = product_fit(diag);
  double oracle = 1e9;
  const int steps = 2000;
  for (int i = 0; i <= steps; ++i) {
    double p1 = static_cast<double>(i) / steps;
    for (int j = 0; j <= steps; ++j) {
      double q1 = static_cast<double>(j) / steps;
      double e00 = 0.5 - p1 * q1;
      double e01 = -p1 * (1.0 - q1);
      double e10 = -(1.0 - p1) * q1;
      double e11 = 0.5 - (1.0 - p1) * (1.0 - q1);
      double err = std::sqrt(e00 * e00 + e01 * e01 + e10 * e10 + e11 * e11);
      if (err < oracle) oracle = err;
    }
  }
  g.require(fit.error > 0.1, "correlated diagonal needs coordination: error " + fmt(fit.error) +
                                 " > 0.1");
  g.require(std::abs(fit.error - oracle) <= 1e-4,
            "matches brute-force grid oracle " + fmt(oracle) + " within 1e-4 (diff " +
                fmt(std::abs(fit.error - oracle)) + ")");

  // Any true product distribution is fit essentially exactly.
  Rng rng(707);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    double p1 = rng.uniform(), q1 = rng.uniform();
    JointDistribution d{{p1 * q1, p1 * (1 - q1), (1 - p1) * q1, (1 - p1) * (1 - q1)}, 2, 2, 0};
    worst = std::max(worst, product_fit(d).error);
  }
  g.require(worst <= 1e-6, "worst error over 100 random product joints " + fmt(worst) + " <= 1e-6");

  // A 1-D normal signal realizes the uneven target through interval cuts.
  JointDistribution target{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, 2, 2, 0};
  Rng zrng(909);
  RealizationResult rr = signal_realization_check(target, 1000000, zrng);
  g.require(rr.error <= 0.002,
            "(1/3,1/3,1/3,0) realized within " + fmt(rr.error) + " over 1e6 probes (<= 0.002)");

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  g.require(secs < 60.0, "runtime " + fmt(secs) + "s < 60s");
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: one-step matrix self-play learns a correlated three-way split.

bool criterion2(const std::string& work) {
  Gate g;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Cell cell = cached_run(work, "c2_s" + std::to_string(seed),
                           matrix_cfg("rpsw-1step", seed, "algorithm = sic-re\n",
                                      "algorithm = sic-re\n"));
    double v = cell.summary.at("mean_recent_reward_t0");
    g.require(std::abs(v) <= 0.05,
              "seed " + std::to_string(seed) + ": final mean reward " + fmt(v) + " within 0.05");

    LoadedTeam team = load_team_policies(cell.ckpt, 0);
    Rng prng(derive_stream(777, "partition" + std::to_string(seed)));
    PartitionProbe probe = probe_signal_partition(net_ptrs(team), {{1.0}, {1.0}}, {2, 2}, team.dz,
                                                  5000, prng, /*greedy=*/true);
    g.require(probe.frequencies[3] <= 0.05, "seed " + std::to_string(seed) + ": P(A,A) " +
                                                fmt(probe.frequencies[3]) + " <= 0.05");
    for (int j = 0; j < 3; ++j) {
      double f = probe.frequencies[static_cast<size_t>(j)];
      g.require(f >= 0.25 && f <= 0.42, "seed " + std::to_string(seed) + ": joint " +
                                            std::to_string(j) + " frequency " + fmt(f) +
                                            " in [0.25, 0.42]");
    }
  }
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: four-step matrix game with per-round payoff shuffles.

bool criterion3(const std::string& work) {
  Gate g;

  // (a) Signal-conditioned self-play stays balanced and abandons whichever
  // joint action the current round's matrix dominates.
  Cell self = cached_run(work, "c3_self", matrix_cfg("rpsw-4step", 41, "algorithm = sic-re\n",
                                                     "algorithm = sic-re\n"));
  double v = self.summary.at("mean_recent_reward_t0");
  g.require(std::abs(v) <= 0.05, "self-play final mean reward " + fmt(v) + " within 0.05");
  LoadedTeam team = load_team_policies(self.ckpt, 0);
  Rng jrng(derive_stream(778, "joint3a"));
  for (int matrix_id = 1; matrix_id <= 4; ++matrix_id) {
    std::vector<double> obs = onehot(4, matrix_id - 1);
    JointDistribution d =
        joint_policy_frequencies(net_ptrs(team), {obs, obs}, {2, 2}, team.dz, 20000, jrng);
    double f = d.probs[static_cast<size_t>(matrix_id - 1)];
    g.require(f <= 0.05, "matrix " + std::to_string(matrix_id) + ": dominated joint frequency " +
                             fmt(f) + " <= 0.05");
  }

  // (b) The signal-conditioned team beats independent learners.
  Cell mixed = cached_run(work, "c3_mixed", matrix_cfg("rpsw-4step", 42, "algorithm = sic-re\n",
                                                       "algorithm = ind-re\n"));
  double row = mixed.summary.at("mean_recent_reward_t0");
  g.require(row > 0.0, "signalled row team beats independent column team: " + fmt(row) + " > 0");

  // (c) Independent learners stay inside the product-distribution family.
  Cell ind = cached_run(work, "c3_ind", matrix_cfg("rpsw-4step", 43, "algorithm = ind-re\n",
                                                   "algorithm = ind-re\n"));
  LoadedTeam ind_team = load_team_policies(ind.ckpt, 0);
  Rng irng(derive_stream(779, "joint3c"));
  for (int matrix_id = 1; matrix_id <= 4; ++matrix_id) {
    std::vector<double> obs = onehot(4, matrix_id - 1);
    JointDistribution d =
        joint_policy_frequencies(net_ptrs(ind_team), {obs, obs}, {2, 2}, ind_team.dz, 20000, irng);
    double err = product_fit(d).error;
    g.require(err <= 0.02, "matrix " + std::to_string(matrix_id) +
                               ": independent joint has product-fit error " + fmt(err) +
                               " <= 0.02");
  }
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: gradient fidelity and the categorical relaxation.

double max_rel_fd_error(std::vector<Tensor*> params,
                        const std::function<ad::NodeId(ad::Tape&)>& build) {
  ad::Tape tape;
  ad::NodeId loss = build(tape);
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (Tensor* t : params) analytic.push_back(t->grad);

  const double h = 1e-6;
  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor* t = params[pi];
    for (size_t k = 0; k < t->values.size(); ++k) {
      double saved = t->values[k];
      t->values[k] = saved + h;
      ad::Tape tp;
      double fp = tp.value(build(tp))[0];
      t->values[k] = saved - h;
      ad::Tape tm;
      double fm = tm.value(build(tm))[0];
      t->values[k] = saved;
      double fd = (fp - fm) / (2.0 * h);
      double got = analytic[pi][k];
      // Relative to the gradient scale, floored so exactly-zero gradients
      // compare against finite-difference noise rather than against zero.
      double denom = std::max({1e-3, std::abs(fd), std::abs(got)});
      worst = std::max(worst, std::abs(fd - got) / denom);
    }
  }
  return worst;
}

bool criterion4(const std::string&) {
  Gate g;
  Rng rng(924);
  auto dims = [&](int lo, int hi) { return lo + rng.uniform_int(hi - lo + 1); };
  auto randv = [&](int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = rng.uniform(-1.2, 1.2);
    return v;
  };

  double worst = 0.0;
  for (int net_i = 0; net_i < 20; ++net_i) {
    int kind = net_i % 5;
    int in = dims(2, 5), hid = dims(3, 7), out = dims(2, 4), rows = dims(1, 3);
    std::vector<double> x = randv(rows * in);

    if (kind == 0) {  // regression head, smooth activations
      Mlp net(MlpSpec({in, hid, out}, Activation::Tanh, OutputActivation::Identity), rng);
      std::vector<double> y = randv(rows * out);
      worst = std::max(worst, max_rel_fd_error(net.param_ptrs(), [&](ad::Tape& t) {
        return t.mse(net.forward(t, t.input(x, rows, in)).output, t.input(y, rows, out));
      }));
    } else if (kind == 1) {  // score-weighted log-likelihood on a softmax head
      Mlp net(MlpSpec({in, hid, out}, Activation::ReLU, OutputActivation::Softmax), rng);
      std::vector<int> taken;
      std::vector<double> adv;
      for (int r = 0; r < rows; ++r) {
        taken.push_back(rng.uniform_int(out));
        adv.push_back(rng.uniform(-1.5, 1.5));
      }
      worst = std::max(worst, max_rel_fd_error(net.param_ptrs(), [&](ad::Tape& t) {
        ad::NodeId logp = t.log_op(t.gather_cols(net.forward(t, t.input(x, rows, in)).output, taken));
        return t.scale(t.weighted_mean(logp, adv), -1.0);
      }));
    } else if (kind == 2 || kind == 3) {  // policy + reconstruction through hiddens
      int dz = dims(2, 3), state_dim = dims(2, 4);
      Mlp policy(MlpSpec({in, hid, out}, Activation::Tanh, OutputActivation::Softmax), rng);
      Mlp unet(MlpSpec({state_dim + hid, dims(3, 6), dz}, Activation::Tanh,
                       OutputActivation::Identity),
               rng);
      std::vector<double> state = randv(rows * state_dim), z = randv(rows * dz);
      std::vector<int> taken;
      std::vector<double> adv;
      for (int r = 0; r < rows; ++r) {
        taken.push_back(rng.uniform_int(out));
        adv.push_back(rng.uniform(-1.5, 1.5));
      }
      std::vector<Tensor*> params = policy.param_ptrs();
      for (Tensor* p : unet.param_ptrs()) params.push_back(p);
      worst = std::max(worst, max_rel_fd_error(params, [&, state_dim, dz](ad::Tape& t) {
        Mlp::Fwd pf = policy.forward(t, t.input(x, rows, in));
        ad::NodeId logp = t.log_op(t.gather_cols(pf.output, taken));
        ad::NodeId pg = t.scale(t.weighted_mean(logp, adv), -1.0);
        std::vector<ad::NodeId> hiddens{pf.hidden};
        ad::NodeId recon = unet_reconstruct(t, unet, t.input(state, rows, state_dim), hiddens);
        ad::NodeId mi = mi_loss_node(t, recon, z);
        std::vector<ad::NodeId> terms{pg, mi};
        std::vector<double> coeffs{1.0, 0.5};
        return t.add_scalars(terms, coeffs);
      }));
    } else {  // relaxed categorical sample feeding a square loss
      Mlp actor(MlpSpec({in, hid, out}, Activation::Tanh, OutputActivation::Identity), rng);
      std::vector<double> noise(static_cast<size_t>(rows * out));
      for (double& n : noise) n = gumbel_noise(rng);
      std::vector<double> target = randv(rows * out);
      worst = std::max(worst, max_rel_fd_error(actor.param_ptrs(), [&](ad::Tape& t) {
        ad::NodeId relaxed =
            gumbel_softmax_node(t, actor.forward(t, t.input(x, rows, in)).output, noise, 0.7);
        return t.mse(relaxed, t.input(target, rows, out));
      }));
    }
  }
  g.require(worst <= 1e-4,
            "worst relative gradient error over 20 random nets " + fmt(worst) + " <= 1e-4");

  // Argmax statistics of the perturbed logits must reproduce the softmax.
  std::vector<double> logits{0.9, -0.2, 0.4, 0.0};
  std::vector<double> expect = relaxed_softmax(logits, 1.0);
  std::vector<double> freq(4, 0.0);
  Rng grng(515);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    std::vector<double> sample = gumbel_softmax_sample(logits, 1.0, grng);
    freq[static_cast<size_t>(argmax_index(sample))] += 1.0 / n;
  }
  double gap = 0.0;
  for (int a = 0; a < 4; ++a) gap = std::max(gap, std::abs(freq[static_cast<size_t>(a)] - expect[static_cast<size_t>(a)]));
  g.require(gap <= 0.01, "argmax frequencies match softmax within " + fmt(gap) + " (<= 0.01)");
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: signal width zero with no regularizer reduces every variant to
// its base algorithm, byte for byte.

bool criterion5(const std::string& work) {
  Gate g;

  auto compare = [&](const std::string& label, const Cell& a, const Cell& b) {
    bool same = slurp(a.metrics) == slurp(b.metrics);
    g.require(same, label + ": metrics byte-identical");
  };

  std::string opp = "algorithm = ind-re\n";
  compare("policy-gradient",
          cached_run(work, "c5_re_sic",
                     matrix_cfg("rpsw-1step", 33, "algorithm = sic-re\ndz = 0\nalpha = 0\n", opp,
                                2000)),
          cached_run(work, "c5_re_base",
                     matrix_cfg("rpsw-1step", 33, "algorithm = ind-re\n", opp, 2000)));

  compare("counterfactual",
          cached_run(work, "c5_coma_sic",
                     matrix_cfg("rpsw-1step", 34,
                                "algorithm = sic-coma\ndz = 0\nalpha = 0\nbatch_size = 64\n", opp,
                                2000)),
          cached_run(work, "c5_coma_base",
                     matrix_cfg("rpsw-1step", 34, "algorithm = coma\nbatch_size = 64\n", opp,
                                2000)));

  std::string knobs = "warmup = 200\nbatch_size = 64\nupdate_every = 10\n";
  std::string mad_opp = "algorithm = maddpg\n" + knobs;
  compare("deterministic actor-critic",
          cached_run(work, "c5_ma_sic",
                     pp_cfg(35, "algorithm = sic-ma\ndz = 0\nalpha = 0\nlr = 0.001\n" + knobs,
                            mad_opp, 100)),
          cached_run(work, "c5_ma_base", pp_cfg(35, "algorithm = maddpg\n" + knobs, mad_opp, 100)));
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: the reconstruction net earns its keep — the signal is readable
// from play after training and not before.

bool criterion6(const std::string& work) {
  Gate g;
  Cell cell = cached_run(work, "c2_s1", matrix_cfg("rpsw-1step", 1, "algorithm = sic-re\n",
                                                   "algorithm = sic-re\n"));

  // Mutual information between the signal and the sampled joint action,
  // estimated by quantile-binning the signal.
  auto sampled_mi = [](const LoadedTeam& team, uint64_t seed) {
    Rng rng(derive_stream(seed, "mi"));
    PartitionProbe probe = probe_signal_partition(net_ptrs(team), {{1.0}, {1.0}}, {2, 2}, team.dz,
                                                  40000, rng, /*greedy=*/false);
    return mutual_information_zbins(probe.signals, probe.joint_actions, 4);
  };

  // Before training: same architecture and seed, weights at initialization.
  Checkpoint trained = load_checkpoint(cell.ckpt);
  ExperimentConfig cfg0 = parse_config(trained.config_text);
  cfg0.out_dir = work + "/c6_pre";
  Runner fresh(cfg0);
  Checkpoint init = fresh.make_checkpoint();
  std::string init_path = work + "/c6_pre_checkpoint.txt";
  save_checkpoint(init_path, init);

  LoadedTeam before = load_team_policies(init_path, 0);
  LoadedTeam after = load_team_policies(cell.ckpt, 0);
  double mi_pre = sampled_mi(before, 61);
  double mi_post = sampled_mi(after, 62);
  g.require(mi_pre <= 0.1, "pre-training I(z; joint) " + fmt(mi_pre) + " <= 0.1 nats");
  g.require(mi_post >= 1.0, "post-training I(z; joint) " + fmt(mi_post) + " >= 1.0 nats");

  // Held-out reconstruction: fresh episodes, hiddens recorded, decoder from
  // the trained checkpoint. Predicting the signal mean scores `baseline`.
  std::vector<Trajectory> episodes = heldout_episodes(cell.ckpt, 400, 4242);
  Mlp unet = instantiate_net(find_net_block(trained, "t0.unet"));
  ExperimentConfig cfg = parse_config(trained.config_text);
  auto environment = make_env(cfg);
  TeamEnvView view = make_team_view(*environment, 0);
  ReconstructionCheck rc = reconstruction_mse(unet, view, episodes);
  g.require(rc.mse <= 0.5 * rc.baseline, "held-out reconstruction MSE " + fmt(rc.mse) +
                                             " <= half the variance baseline " +
                                             fmt(rc.baseline));
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: pursuit ordering at desk scale across five seeds.

struct PursuitCells {
  std::vector<double> sic_pred;       // signalled predators vs plain preys
  std::vector<double> plain;          // plain predators vs plain preys
  std::vector<double> sic_prey;       // plain predators vs signalled preys
  std::vector<double> ablation_pred;  // signalled predators without the MI term
  std::string sic_pred_ckpt_s1, plain_ckpt_s1;
};

PursuitCells pursuit_cells(const std::string& work) {
  PursuitCells out;
  for (uint64_t s = 1; s <= 5; ++s) {
    std::string tag = "_s" + std::to_string(s);
    Cell m = cached_run(work, "c7_plain" + tag,
                        pp_cfg(s, "algorithm = maddpg\n", "algorithm = maddpg\n"));
    Cell sp = cached_run(work, "c7_sicpred" + tag,
                         pp_cfg(s, "algorithm = sic-ma\n", "algorithm = maddpg\n"));
    Cell sy = cached_run(work, "c7_sicprey" + tag,
                         pp_cfg(s, "algorithm = maddpg\n", "algorithm = sic-ma\n"));
    Cell ab = cached_run(work, "c7_ablation" + tag,
                         pp_cfg(s, "algorithm = sic-ma\nalpha = 0\n", "algorithm = maddpg\n"));

    const int eval_eps = 500;
    const std::vector<uint64_t> eval_seeds{101};
    out.sic_pred.push_back(cross_play(sp.ckpt, m.ckpt, eval_eps, eval_seeds).mean);
    out.plain.push_back(cross_play(m.ckpt, m.ckpt, eval_eps, eval_seeds).mean);
    out.sic_prey.push_back(cross_play(m.ckpt, sy.ckpt, eval_eps, eval_seeds).mean);
    out.ablation_pred.push_back(cross_play(ab.ckpt, m.ckpt, eval_eps, eval_seeds).mean);
    if (s == 1) {
      out.sic_pred_ckpt_s1 = sp.ckpt;
      out.plain_ckpt_s1 = m.ckpt;
    }
    std::printf("    seed %llu: sic-pred %.2f, plain %.2f, sic-prey %.2f, ablation %.2f\n",
                static_cast<unsigned long long>(s), out.sic_pred.back(), out.plain.back(),
                out.sic_prey.back(), out.ablation_pred.back());
    std::fflush(stdout);
  }
  return out;
}

bool criterion7(const std::string& work) {
  Gate g;
  PursuitCells c = pursuit_cells(work);
  double m_sic = mean_of(c.sic_pred), m_plain = mean_of(c.plain);
  double m_prey = mean_of(c.sic_prey), m_abl = mean_of(c.ablation_pred);

  g.require(m_sic >= m_plain, "signalled predators catch at least as much: " + fmt(m_sic) +
                                  " >= " + fmt(m_plain));
  g.require(m_prey <= m_plain, "signalled preys concede no more: " + fmt(m_prey) +
                                   " <= " + fmt(m_plain));
  double pooled = pooled_std(c.ablation_pred, c.plain);
  bool between = (m_abl >= std::min(m_plain, m_sic) - 1e-12) &&
                 (m_abl <= std::max(m_plain, m_sic) + 1e-12);
  bool close = std::abs(m_abl - m_plain) <= pooled;
  g.require(between || close, "regularizer-free ablation " + fmt(m_abl) + " lies between " +
                                  fmt(m_plain) + " and " + fmt(m_sic) + " or within pooled std " +
                                  fmt(pooled) + " of the plain baseline");
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: signal-width sensitivity against a fixed prey.

bool criterion8(const std::string& work) {
  Gate g;
  Cell prey_src = cached_run(work, "c7_plain_s1",
                             pp_cfg(1, "algorithm = maddpg\n", "algorithm = maddpg\n"));
  std::string freeze = "freeze = " + prey_src.ckpt + "\n";

  std::map<int, std::vector<double>> scores;
  std::map<uint64_t, Cell> dz0_cells;
  for (int dz : {0, 5, 10, 20}) {
    for (uint64_t s : {1ull, 2ull, 3ull}) {
      std::string t0 = "algorithm = sic-ma\ndz = " + std::to_string(dz) + "\n";
      if (dz == 0) t0 += "alpha = 0\n";
      Cell cell = cached_run(work, "c8_dz" + std::to_string(dz) + "_s" + std::to_string(s),
                             pp_cfg(s, t0, freeze));
      scores[dz].push_back(cross_play(cell.ckpt, prey_src.ckpt, 500, {101}).mean);
      if (dz == 0) dz0_cells.emplace(s, cell);
    }
    std::printf("    dz %d: mean %.2f (std %.2f)\n", dz, mean_of(scores[dz]),
                sample_std(scores[dz]));
    std::fflush(stdout);
  }

  // Width zero must be indistinguishable from the base trainer.
  for (uint64_t s : {1ull, 2ull, 3ull}) {
    Cell mad = cached_run(work, "c8_mad_s" + std::to_string(s),
                          pp_cfg(s, "algorithm = maddpg\n", freeze));
    bool same = slurp(dz0_cells.at(s).metrics) == slurp(mad.metrics);
    g.require(same, "seed " + std::to_string(s) + ": width-0 metrics byte-identical to base");
  }

  double m0 = mean_of(scores[0]);
  for (int dz : {5, 10, 20}) {
    double md = mean_of(scores[dz]);
    double pooled = pooled_std(scores[dz], scores[0]);
    g.require(md >= m0 - pooled, "dz " + std::to_string(dz) + " mean " + fmt(md) +
                                     " >= width-0 mean " + fmt(m0) + " - pooled std " +
                                     fmt(pooled));
  }
  return g.ok;
}

// ---------------------------------------------------------------------------
// Criterion 9: collision heatmap export over repeated fixed layouts.

bool validate_collisions_csv(Gate& g, const std::string& path, long long expected_rows,
                             int games) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line) || line != "episode,step,predator_id,prey_id,x,y") {
    g.require(false, path + ": header row");
    return false;
  }
  long long rows = 0;
  bool shape_ok = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream fields(line);
    std::string tok;
    std::vector<double> v;
    while (std::getline(fields, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 6 || v[0] < 0 || v[0] >= games || v[1] < 0 || v[1] >= 25 ||
        (v[2] != 0 && v[2] != 1) || (v[3] != 2 && v[3] != 3) || !std::isfinite(v[4]) ||
        !std::isfinite(v[5]) || std::abs(v[4]) > 2.0 || std::abs(v[5]) > 2.0) {
      shape_ok = false;
      break;
    }
  }
  g.require(shape_ok, path + ": every row has a valid episode, step, pair, and position");
  g.require(rows == expected_rows, path + ": row count " + std::to_string(rows) +
                                       " equals reported collision total " +
                                       std::to_string(expected_rows));
  return shape_ok;
}

bool criterion9(const std::string& work) {
  Gate g;
  Cell m = cached_run(work, "c7_plain_s1",
                      pp_cfg(1, "algorithm = maddpg\n", "algorithm = maddpg\n"));
  Cell sp = cached_run(work, "c7_sicpred_s1",
                       pp_cfg(1, "algorithm = sic-ma\n", "algorithm = maddpg\n"));

  fs::create_directories(work + "/c9");
  HeatmapResult sic = collision_heatmap(sp.ckpt, m.ckpt, 1000, 31, work + "/c9/signalled.csv");
  HeatmapResult mad = collision_heatmap(m.ckpt, m.ckpt, 1000, 31, work + "/c9/plain.csv");

  g.require(sic.games == 1000 && mad.games == 1000, "both pipelines played 1000 games");
  validate_collisions_csv(g, work + "/c9/signalled.csv", sic.total_collisions, 1000);
  validate_collisions_csv(g, work + "/c9/plain.csv", mad.total_collisions, 1000);
  g.require(sic.total_collisions >= mad.total_collisions,
            "signalled predators collide at least as often on the fixed layout: " +
                std::to_string(sic.total_collisions) + " >= " + std::to_string(mad.total_collisions));
  return g.ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string work;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.insert(std::atoi(argv[++i]));
    } else if (arg == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]... [--workdir DIR]\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty())
    for (int n = 1; n <= 9; ++n) selected.insert(n);
  if (work.empty()) {
    const char* env = std::getenv("SICOORD_ACCEPT_DIR");
    work = env ? env : (fs::temp_directory_path() / "sicoord_acceptance").string();
  }
  fs::create_directories(work);
  std::printf("acceptance work directory: %s\n", work.c_str());

  using CriterionFn = bool (*)(const std::string&);
  CriterionFn fns[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                       criterion6, criterion7, criterion8, criterion9};

  int failures = 0;
  for (int n : selected) {
    if (n < 1 || n > 9) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 2;
    }
    std::printf("criterion %d:\n", n);
    std::fflush(stdout);
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = fns[n - 1](work);
    } catch (const std::exception& e) {
      std::printf("    BAD  unexpected exception: %s\n", e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d  (%.1fs)\n", ok ? "PASS" : "FAIL", n, secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
