#include "sic/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "sic/algo/coma.hpp"
#include "sic/algo/maddpg.hpp"
#include "sic/algo/reinforce.hpp"
#include "sic/algo/rollout.hpp"
#include "sic/errors.hpp"

namespace sic {

namespace fs = std::filesystem;

Runner::Runner(const ExperimentConfig& cfg) : cfg_(cfg) {
  env_ = make_env(cfg_);
  const int tcount = env_->team_count();
  StreamFn sf = [this](const std::string& name) -> Rng& { return stream(name); };
  for (int t = 0; t < tcount; ++t) {
    const TeamConfig& tc = cfg_.teams[static_cast<size_t>(t)];
    if (!tc.freeze_checkpoint.empty()) {
      teams_.push_back(make_frozen_team(cfg_, *env_, t));
      continue;
    }
    TeamEnvView view = make_team_view(*env_, t);
    std::string prefix = "t" + std::to_string(t);
    switch (tc.algorithm) {
      case Algorithm::IndRe:
      case Algorithm::SicRe:
        teams_.push_back(std::make_unique<ReinforceTrainer>(view, tc.params, prefix, sf));
        break;
      case Algorithm::Coma:
      case Algorithm::SicComa:
        teams_.push_back(std::make_unique<ComaTrainer>(view, tc.params, prefix, sf));
        break;
      case Algorithm::Maddpg:
      case Algorithm::SicMa:
        teams_.push_back(std::make_unique<MaddpgTrainer>(view, tc.params, prefix, sf));
        break;
    }
  }
  bool any_replay = false;
  for (const auto& tm : teams_) any_replay = any_replay || tm->needs_replay();
  if (any_replay) buffer_ = std::make_unique<ReplayBuffer>(cfg_.replay_capacity);
  window_reward_.assign(static_cast<size_t>(tcount), 0.0);
  tail_.resize(static_cast<size_t>(tcount));
  tail_cap_ = std::max<long long>(1, cfg_.episodes / 10);
}

Rng& Runner::stream(const std::string& name) {
  auto it = streams_.find(name);
  if (it != streams_.end()) return it->second;
  auto pos = streams_.emplace(name, Rng(derive_stream(cfg_.seed, name))).first;
  return pos->second;
}

Trajectory Runner::train_episode() {
  const int n = env_->agent_count();
  const int tcount = env_->team_count();

  std::vector<PolicyHandle> handles(static_cast<size_t>(n));
  for (int t = 0; t < tcount; ++t) {
    std::vector<PolicyHandle> th = teams_[static_cast<size_t>(t)]->policy_handles();
    const TeamEnvView& v = teams_[static_cast<size_t>(t)]->view();
    for (int i = 0; i < v.size(); ++i)
      handles[static_cast<size_t>(v.agents[static_cast<size_t>(i)])] = th[static_cast<size_t>(i)];
  }

  std::vector<NextActionSource> sources;
  if (buffer_) {
    sources.resize(static_cast<size_t>(n));
    for (const auto& tm : teams_) tm->fill_sources(sources);
  }

  RolloutSpec spec;
  spec.env = env_.get();
  spec.policies = std::move(handles);
  spec.exec = ExecMode::Train;
  spec.env_rng = &stream("env");
  for (int t = 0; t < tcount; ++t)
    spec.signal_rngs.push_back(&stream("signal.t" + std::to_string(t)));
  for (int a = 0; a < n; ++a) spec.action_rngs.push_back(&stream("act.a" + std::to_string(a)));
  if (buffer_) {
    spec.on_step = [this, &sources](const Trajectory& traj,
                                    const std::vector<std::vector<double>>& next_obs) {
      const TrajStep& s = traj.steps.back();
      Transition tr;
      tr.obs = s.obs;
      tr.next_obs = next_obs;
      tr.actions = s.actions;
      tr.rewards = s.rewards;
      for (const Signal& sig : traj.team_signals) tr.team_signals.push_back(sig.values);
      tr.done = s.done;
      buffer_->add(std::move(tr));
      for (const auto& tm : teams_) tm->on_transition(*buffer_, sources);
    };
  }

  Trajectory traj = run_episode(spec);
  for (const auto& tm : teams_) tm->on_episode(traj);
  episode_ += 1;
  return traj;
}

void Runner::write_metrics_row(std::ostream& out) {
  out << episode_;
  for (size_t t = 0; t < teams_.size(); ++t) {
    double mean = window_count_ > 0 ? window_reward_[t] / static_cast<double>(window_count_) : 0.0;
    const TeamMetrics& m = teams_[t]->metrics();
    out << ',' << fmt_double(mean) << ',' << fmt_double(m.policy_loss) << ','
        << fmt_double(m.critic_loss) << ',' << fmt_double(m.mi_loss);
  }
  out << '\n';
  std::fill(window_reward_.begin(), window_reward_.end(), 0.0);
  window_count_ = 0;
}

RunResult Runner::run(long long stop_after) {
  auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg_.out_dir);
  {
    std::ofstream cf(cfg_.out_dir + "/config.cfg", std::ios::binary);
    if (!cf) throw ConfigError("cannot write " + cfg_.out_dir + "/config.cfg");
    cf << serialize_config(cfg_);
  }

  const std::string metrics_path = cfg_.out_dir + "/metrics.csv";
  const bool fresh = episode_ == 0 || !fs::exists(metrics_path);
  std::ofstream mf(metrics_path,
                   fresh ? std::ios::binary | std::ios::trunc : std::ios::binary | std::ios::app);
  if (!mf) throw ConfigError("cannot write " + metrics_path);
  const int tcount = env_->team_count();
  if (fresh) {
    mf << "episode";
    for (int t = 0; t < tcount; ++t)
      mf << ",reward_t" << t << ",policy_loss_t" << t << ",critic_loss_t" << t << ",mi_loss_t"
         << t;
    mf << '\n';
  }

  long long target = cfg_.episodes;
  if (stop_after > 0) target = std::min(target, episode_ + stop_after);
  long long trained = 0;
  while (episode_ < target) {
    Trajectory traj = train_episode();
    trained += 1;
    for (int t = 0; t < tcount; ++t) {
      double r = traj.team_return(t, *env_);
      window_reward_[static_cast<size_t>(t)] += r;
      auto& ring = tail_[static_cast<size_t>(t)];
      ring.push_back(r);
      if (static_cast<long long>(ring.size()) > tail_cap_) ring.pop_front();
    }
    window_count_ += 1;
    if (cfg_.metrics_every > 0 && episode_ % cfg_.metrics_every == 0) write_metrics_row(mf);
    if (cfg_.checkpoint_every > 0 && episode_ % cfg_.checkpoint_every == 0)
      save_checkpoint(cfg_.out_dir + "/checkpoint_ep" + std::to_string(episode_) + ".txt",
                      make_checkpoint());
  }
  // a partial window flushes only at true completion, so a stopped-and-resumed
  // run produces byte-identical metrics to an uninterrupted one
  if (episode_ >= cfg_.episodes && window_count_ > 0) write_metrics_row(mf);
  mf.flush();
  if (!mf) throw ConfigError("short write on " + metrics_path);

  RunResult res;
  res.episodes_trained = trained;
  res.checkpoint_path = cfg_.out_dir + "/checkpoint_final.txt";
  save_checkpoint(res.checkpoint_path, make_checkpoint());

  for (int t = 0; t < tcount; ++t) {
    const auto& ring = tail_[static_cast<size_t>(t)];
    double mean = 0.0;
    for (double v : ring) mean += v;
    if (!ring.empty()) mean /= static_cast<double>(ring.size());
    res.mean_recent_reward.push_back(mean);
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream sf(cfg_.out_dir + "/summary.txt", std::ios::binary);
  sf << "episodes = " << episode_ << '\n';
  for (int t = 0; t < tcount; ++t) {
    sf << "mean_recent_reward_t" << t << " = " << fmt_double(res.mean_recent_reward[static_cast<size_t>(t)])
       << '\n';
    sf << "recent_window_t" << t << " = " << tail_[static_cast<size_t>(t)].size() << '\n';
  }
  sf << "wall_seconds = " << fmt_double(res.wall_seconds) << '\n';
  return res;
}

Checkpoint Runner::make_checkpoint() {
  Checkpoint ck;
  ck.episode = episode_;
  ck.config_text = serialize_config(cfg_);
  for (const auto& kv : streams_) ck.rng_states.emplace_back(kv.first, kv.second.state());
  for (const auto& tm : teams_)
    tm->visit_nets(
        [&](const std::string& name, Mlp& net) { ck.nets.push_back(snapshot_net(name, net)); });
  for (const auto& tm : teams_)
    tm->visit_adam([&](const std::string& name, AdamState& st) {
      Checkpoint::AdamBlock b;
      b.name = name;
      b.step_count = st.step_count;
      b.m = st.m;
      b.v = st.v;
      ck.adams.push_back(std::move(b));
    });
  for (const auto& tm : teams_)
    tm->visit_counters(
        [&](const std::string& name, long long& v) { ck.counters.emplace_back(name, v); });

  ck.state.emplace_back("window.count", static_cast<double>(window_count_));
  for (size_t t = 0; t < teams_.size(); ++t)
    ck.state.emplace_back("window.reward.t" + std::to_string(t), window_reward_[t]);
  for (size_t t = 0; t < teams_.size(); ++t) {
    const TeamMetrics& m = teams_[t]->metrics();
    std::string p = "t" + std::to_string(t);
    ck.state.emplace_back(p + ".policy_loss", m.policy_loss);
    ck.state.emplace_back(p + ".critic_loss", m.critic_loss);
    ck.state.emplace_back(p + ".mi_loss", m.mi_loss);
  }

  for (size_t t = 0; t < teams_.size(); ++t) {
    std::vector<Trajectory>* pending = teams_[t]->mutable_pending();
    if (!pending) continue;
    Checkpoint::PendingBlock b;
    b.team = static_cast<int>(t);
    b.episodes = *pending;
    ck.pending.push_back(std::move(b));
  }

  if (buffer_ && cfg_.checkpoint_replay) {
    ck.has_replay = true;
    ck.replay_next = buffer_->next_slot();
    ck.replay_inserted = buffer_->inserted();
    for (int i = 0; i < buffer_->size(); ++i) ck.replay.push_back(buffer_->at(i));
  }
  return ck;
}

void Runner::apply_checkpoint(const Checkpoint& ck) {
  episode_ = ck.episode;

  std::map<std::string, uint64_t> rngs(ck.rng_states.begin(), ck.rng_states.end());
  if (rngs.size() != ck.rng_states.size())
    throw CheckpointError("duplicate rng stream in checkpoint");
  for (const auto& kv : streams_)
    if (rngs.find(kv.first) == rngs.end())
      throw CheckpointError("checkpoint missing rng stream \"" + kv.first + "\"");
  for (const auto& kv : rngs) stream(kv.first).set_state(kv.second);

  std::map<std::string, const Checkpoint::NetBlock*> nets;
  for (const auto& b : ck.nets)
    if (!nets.emplace(b.name, &b).second)
      throw CheckpointError("duplicate net \"" + b.name + "\" in checkpoint");
  size_t nets_used = 0;
  for (const auto& tm : teams_)
    tm->visit_nets([&](const std::string& name, Mlp& net) {
      auto it = nets.find(name);
      if (it == nets.end()) throw CheckpointError("checkpoint missing net \"" + name + "\"");
      restore_net(*it->second, net);
      nets_used += 1;
    });
  if (nets_used != ck.nets.size())
    throw CheckpointError("checkpoint holds nets this experiment does not");

  std::map<std::string, const Checkpoint::AdamBlock*> adams;
  for (const auto& b : ck.adams)
    if (!adams.emplace(b.name, &b).second)
      throw CheckpointError("duplicate optimizer \"" + b.name + "\" in checkpoint");
  size_t adams_used = 0;
  for (const auto& tm : teams_)
    tm->visit_adam([&](const std::string& name, AdamState& st) {
      auto it = adams.find(name);
      if (it == adams.end())
        throw CheckpointError("checkpoint missing optimizer \"" + name + "\"");
      st.step_count = it->second->step_count;
      st.m = it->second->m;
      st.v = it->second->v;
      adams_used += 1;
    });
  if (adams_used != ck.adams.size())
    throw CheckpointError("checkpoint holds optimizers this experiment does not");

  std::map<std::string, long long> counters(ck.counters.begin(), ck.counters.end());
  if (counters.size() != ck.counters.size())
    throw CheckpointError("duplicate counter in checkpoint");
  size_t counters_used = 0;
  for (const auto& tm : teams_)
    tm->visit_counters([&](const std::string& name, long long& v) {
      auto it = counters.find(name);
      if (it == counters.end())
        throw CheckpointError("checkpoint missing counter \"" + name + "\"");
      v = it->second;
      counters_used += 1;
    });
  if (counters_used != counters.size())
    throw CheckpointError("checkpoint holds counters this experiment does not");

  std::map<std::string, double> state(ck.state.begin(), ck.state.end());
  if (state.size() != ck.state.size()) throw CheckpointError("duplicate state entry in checkpoint");
  size_t state_used = 0;
  auto take = [&](const std::string& key) {
    auto it = state.find(key);
    if (it == state.end()) throw CheckpointError("checkpoint missing state \"" + key + "\"");
    state_used += 1;
    return it->second;
  };
  window_count_ = static_cast<long long>(take("window.count"));
  for (size_t t = 0; t < teams_.size(); ++t)
    window_reward_[t] = take("window.reward.t" + std::to_string(t));
  for (size_t t = 0; t < teams_.size(); ++t) {
    TeamMetrics& m = teams_[t]->metrics_mut();
    std::string p = "t" + std::to_string(t);
    m.policy_loss = take(p + ".policy_loss");
    m.critic_loss = take(p + ".critic_loss");
    m.mi_loss = take(p + ".mi_loss");
  }
  if (state_used != state.size())
    throw CheckpointError("checkpoint holds state entries this experiment does not");

  size_t pending_used = 0;
  for (size_t t = 0; t < teams_.size(); ++t) {
    std::vector<Trajectory>* pending = teams_[t]->mutable_pending();
    if (!pending) continue;
    const Checkpoint::PendingBlock* found = nullptr;
    for (const auto& b : ck.pending)
      if (b.team == static_cast<int>(t)) found = &b;
    if (!found)
      throw CheckpointError("checkpoint missing pending block for team " + std::to_string(t));
    *pending = found->episodes;
    pending_used += 1;
  }
  if (pending_used != ck.pending.size())
    throw CheckpointError("checkpoint holds pending blocks this experiment does not");

  if (ck.has_replay) {
    if (!buffer_)
      throw CheckpointError("checkpoint carries a replay buffer but no team uses one");
    try {
      buffer_->restore(ck.replay, ck.replay_next, ck.replay_inserted);
    } catch (const Error& err) {
      throw CheckpointError(std::string("replay restore failed: ") + err.what());
    }
  }
}

std::unique_ptr<Runner> Runner::from_checkpoint(const std::string& path,
                                                long long override_episodes,
                                                const std::string& override_out) {
  Checkpoint ck = load_checkpoint(path);
  ExperimentConfig cfg = parse_config(ck.config_text);
  if (override_episodes > 0) {
    cfg.episodes = override_episodes;
    for (TeamConfig& tc : cfg.teams) tc.params.total_episodes = override_episodes;
  }
  if (!override_out.empty()) cfg.out_dir = override_out;
  auto runner = std::make_unique<Runner>(cfg);
  runner->apply_checkpoint(ck);
  return runner;
}

std::unique_ptr<FrozenTeam> make_frozen_team(const ExperimentConfig& cfg, const env::Env& e,
                                             int team) {
  const TeamConfig& tc = cfg.teams[static_cast<size_t>(team)];
  Checkpoint ck = load_checkpoint(tc.freeze_checkpoint);
  ExperimentConfig src = parse_config(ck.config_text);
  if (src.scenario != cfg.scenario || src.rounds != cfg.rounds ||
      src.team_size != cfg.team_size || src.landmarks != cfg.landmarks)
    throw ConfigError("frozen team " + std::to_string(team) +
                      ": checkpoint comes from an incompatible scenario");

  const TeamConfig& stc = src.teams[static_cast<size_t>(team)];
  TeamEnvView view = make_team_view(e, team);
  std::string prefix = "t" + std::to_string(team);

  std::map<std::string, const Checkpoint::NetBlock*> by_name;
  for (const auto& b : ck.nets) by_name.emplace(b.name, &b);

  std::vector<std::unique_ptr<Mlp>> nets;
  for (int i = 0; i < view.size(); ++i) {
    std::string name = prefix + ".a" + std::to_string(i) + ".policy";
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw ConfigError("frozen team " + std::to_string(team) + ": checkpoint has no net \"" +
                        name + "\"");
    nets.push_back(std::make_unique<Mlp>(instantiate_net(*it->second)));
    int want = view.obs_dim(i) + stc.params.dz;
    if (nets.back()->spec().input_dim() != want)
      throw ConfigError("frozen team " + std::to_string(team) + ": net \"" + name +
                        "\" expects a different observation/signal width");
  }

  // hyperparameters travel with the source run so the signal dimension and
  // relaxation temperature match what the nets were trained with
  return std::make_unique<FrozenTeam>(std::move(view), stc.params, prefix,
                                      algorithm_policy_mode(stc.algorithm), std::move(nets));
}

}  // namespace sic
