#include <cmath>
#include <vector>

#include "doctest.h"
#include "sic/algo/returns.hpp"
#include "sic/algo/rollout.hpp"
#include "sic/algo/trainer.hpp"
#include "sic/algo/trajectory.hpp"
#include "sic/env/matrix_game.hpp"
#include "sic/errors.hpp"
#include "sic/mlp.hpp"
#include "sic/rng.hpp"
#include "sic/signal.hpp"
#include "test_util.hpp"

using namespace sic;

namespace {

Mlp zero_net(int in, int out) {
  Rng rng(1);
  Mlp net(MlpSpec({in, out}, Activation::ReLU, OutputActivation::Softmax), rng);
  for (Tensor& p : net.params()) std::fill(p.values.begin(), p.values.end(), 0.0);
  return net;
}

}  // namespace

TEST_CASE("discounted returns") {
  std::vector<double> r{0, 0, 0, 4};
  auto g = discounted_returns(r, 0.9);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(2.916).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(3.24).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(4.0).epsilon(1e-12));

  CHECK(discounted_returns({}, 0.9).empty());
  std::vector<double> r2{1, 2, 3};
  CHECK(discounted_returns(r2, 0.0) == r2);
  CHECK_THROWS_AS(discounted_returns(r2, 1.5), ParameterError);
}

TEST_CASE("generalized advantage estimation") {
  std::vector<double> r{1, 1};
  std::vector<double> v{0.5, 0.5, 0.0};
  auto a = gae_advantages(r, v, 0.99, 0.8);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == doctest::Approx(1.391).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("lambda 1 telescopes to bootstrapped returns minus values") {
    Rng rng(8);
    std::vector<double> rr(5), vv(6);
    for (double& x : rr) x = rng.uniform(-1, 1);
    for (double& x : vv) x = rng.uniform(-1, 1);
    auto adv = gae_advantages(rr, vv, 0.9, 1.0);
    for (int t = 0; t < 5; ++t) {
      double g = vv[5];
      for (int k = 4; k >= t; --k) g = rr[static_cast<size_t>(k)] + 0.9 * g;
      CHECK(adv[static_cast<size_t>(t)] == doctest::Approx(g - vv[static_cast<size_t>(t)]).epsilon(1e-10));
    }
  }
  SUBCASE("lambda 0 reduces to one-step TD errors") {
    auto adv = gae_advantages(r, v, 0.99, 0.0);
    CHECK(adv[0] == doctest::Approx(1 + 0.99 * 0.5 - 0.5));
    CHECK(adv[1] == doctest::Approx(1 + 0.99 * 0.0 - 0.5));
  }

  CHECK_THROWS_AS(gae_advantages(r, std::vector<double>{0.5, 0.5}, 0.99, 0.8), InputShapeError);
  CHECK_THROWS_AS(gae_advantages(r, v, 0.99, 2.0), ParameterError);
}

TEST_CASE("counterfactual advantage") {
  std::vector<double> q{1, 3};
  std::vector<double> p{0.5, 0.5};
  CHECK(coma_advantage(q, p, 1) == doctest::Approx(1.0));
  CHECK(coma_advantage(q, p, 0) == doctest::Approx(-1.0));
  std::vector<double> onehot{1, 0};
  CHECK(coma_advantage(q, onehot, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(coma_advantage(q, std::vector<double>{1.0}, 0), InputShapeError);
  CHECK_THROWS_AS(coma_advantage(q, p, 2), InputShapeError);
}

TEST_CASE("epsilon schedule anneals over the first half of training") {
  CHECK(epsilon_schedule(0.3, 0.05, 0, 1000) == doctest::Approx(0.3));
  CHECK(epsilon_schedule(0.3, 0.05, 250, 1000) == doctest::Approx(0.175));
  CHECK(epsilon_schedule(0.3, 0.05, 500, 1000) == doctest::Approx(0.05));
  CHECK(epsilon_schedule(0.3, 0.05, 900, 1000) == doctest::Approx(0.05));
}

TEST_CASE("signal sampling draws exactly dim normals") {
  Rng rng(77);
  uint64_t before = rng.state();
  Signal none = sample_signal(0, rng);
  CHECK(none.dim() == 0);
  CHECK(rng.state() == before);  // nothing consumed

  Signal z = sample_signal(3, rng);
  REQUIRE(z.dim() == 3);
  Rng replica(77);
  for (int i = 0; i < 3; ++i)
    CHECK(z.values[static_cast<size_t>(i)] == doctest::Approx(replica.normal()).epsilon(1e-15));
}

TEST_CASE("reconstruction loss values") {
  std::vector<double> z{1.0, 2.0};
  std::vector<double> zp{1.5, 2.5};
  CHECK(mi_loss(z, zp) == doctest::Approx(0.25));
  CHECK(mi_loss({}, {}) == 0.0);

  std::vector<std::vector<double>> zs{{1.0, 2.0}, {0.0, 0.0}};
  std::vector<std::vector<double>> zps{{1.5, 2.5}, {2.0, 0.0}};
  // step losses 0.25 and 2.0 -> mean 1.125
  CHECK(mi_loss_batch(zs, zps) == doctest::Approx(1.125));

  ad::Tape t;
  std::vector<double> zrows{1.0, 2.0, 0.0, 0.0};
  std::vector<double> zprows{1.5, 2.5, 2.0, 0.0};
  ad::NodeId zp_node = t.input(zprows, 2, 2);
  CHECK(t.value(mi_loss_node(t, zp_node, zrows))[0] == doctest::Approx(1.125));
}

TEST_CASE("replay buffer is a FIFO ring with uniform distinct sampling") {
  ReplayBuffer buf(3);
  CHECK(buf.capacity() == 3);
  auto make = [](double tag) {
    Transition t;
    t.rewards = {tag};
    return t;
  };
  buf.add(make(0));
  buf.add(make(1));
  buf.add(make(2));
  CHECK(buf.size() == 3);
  buf.add(make(3));  // evicts the oldest
  CHECK(buf.size() == 3);
  CHECK(buf.inserted() == 4);
  std::vector<double> tags;
  for (int i = 0; i < 3; ++i) tags.push_back(buf.at(i).rewards[0]);
  std::sort(tags.begin(), tags.end());
  CHECK(tags == std::vector<double>{1, 2, 3});

  Rng rng(5);
  auto idx = buf.sample_indices(2, rng);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] != idx[1]);
  for (int i : idx) {
    CHECK(i >= 0);
    CHECK(i < 3);
  }
  CHECK_THROWS_AS(buf.sample_indices(4, rng), NotReadyError);

  // Sampling covers the whole buffer over many draws.
  std::vector<int> seen(3, 0);
  for (int rep = 0; rep < 200; ++rep)
    for (int i : buf.sample_indices(2, rng)) seen[static_cast<size_t>(i)] += 1;
  for (int c : seen) CHECK(c > 60);

  // Ring state restore keeps eviction order.
  ReplayBuffer buf2(3);
  std::vector<Transition> items;
  for (int i = 0; i < 3; ++i) items.push_back(buf.at(i));
  buf2.restore(items, buf.next_slot(), buf.inserted());
  CHECK(buf2.inserted() == 4);
  buf2.add(make(9));  // must evict the same slot buf would have
  buf.add(make(9));
  for (int i = 0; i < 3; ++i) CHECK(buf.at(i).rewards[0] == buf2.at(i).rewards[0]);
}

TEST_CASE("select_action honours execution modes") {
  // Zero weights, biases (2, -1): constant logits independent of input.
  Rng rng(1);
  Mlp net(MlpSpec({1, 2}, Activation::ReLU, OutputActivation::Identity), rng);
  std::fill(net.params()[0].values.begin(), net.params()[0].values.end(), 0.0);
  net.params()[1].values = {2.0, -1.0};
  std::vector<double> obs{1.0};

  PolicyHandle gumbel{&net, PolicyMode::DeterministicGumbel, 0, 0.0};
  Rng arng(3);
  CHECK(select_action(gumbel, obs, {}, ExecMode::Greedy, arng) == 0);
  CHECK(select_action(gumbel, obs, {}, ExecMode::Train, arng) == 0);  // eps 0 -> argmax

  // Full exploration ignores the logits entirely.
  PolicyHandle explore{&net, PolicyMode::DeterministicGumbel, 0, 1.0};
  int ones = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) ones += select_action(explore, obs, {}, ExecMode::Train, arng);
  CHECK(std::abs(ones / static_cast<double>(n) - 0.5) < 0.05);

  // Sample mode follows softmax(2, -1) ~ (0.953, 0.047).
  int pick1 = 0;
  for (int i = 0; i < n; ++i)
    pick1 += select_action(gumbel, obs, {}, ExecMode::Sample, arng);
  CHECK(std::abs(pick1 / static_cast<double>(n) - 0.0474) < 0.02);

  // Softmax-headed policy: Greedy takes the mode, Sample follows the probs.
  Mlp smax(MlpSpec({1, 2}, Activation::ReLU, OutputActivation::Softmax), rng);
  std::fill(smax.params()[0].values.begin(), smax.params()[0].values.end(), 0.0);
  smax.params()[1].values = {1.0, 0.0};
  PolicyHandle stoch{&smax, PolicyMode::StochasticSoftmax, 0, 0.0};
  CHECK(select_action(stoch, obs, {}, ExecMode::Greedy, arng) == 0);
  int c1 = 0;
  for (int i = 0; i < n; ++i) c1 += select_action(stoch, obs, {}, ExecMode::Sample, arng);
  CHECK(std::abs(c1 / static_cast<double>(n) - 0.2689) < 0.03);

  PolicyHandle missing{nullptr, PolicyMode::StochasticSoftmax, 0, 0.0};
  CHECK_THROWS_AS(select_action(missing, obs, {}, ExecMode::Greedy, arng), ParameterError);
}

TEST_CASE("rollouts are reproducible from the stream seeds") {
  auto play = [](uint64_t seed) {
    env::OneStepRpsw game;
    test::StreamBag bag(seed);
    std::vector<Mlp> nets;
    Rng init(11);
    for (int a = 0; a < 4; ++a)
      nets.emplace_back(MlpSpec({1, 4, 2}, Activation::ReLU, OutputActivation::Softmax), init);

    RolloutSpec spec;
    spec.env = &game;
    for (int a = 0; a < 4; ++a)
      spec.policies.push_back({&nets[static_cast<size_t>(a)], PolicyMode::StochasticSoftmax, 0, 0.0});
    spec.exec = ExecMode::Sample;
    spec.env_rng = &bag.get("env");
    spec.signal_rngs = {&bag.get("sig0"), &bag.get("sig1")};
    spec.action_rngs = {&bag.get("a0"), &bag.get("a1"), &bag.get("a2"), &bag.get("a3")};
    spec.env_id = "one-step";

    std::vector<Trajectory> out;
    for (int ep = 0; ep < 20; ++ep) out.push_back(run_episode(spec));
    return out;
  };

  auto t1 = play(123);
  auto t2 = play(123);
  auto t3 = play(124);
  REQUIRE(t1.size() == t2.size());
  bool any_diff_seed_differs = false;
  for (size_t e = 0; e < t1.size(); ++e) {
    REQUIRE(t1[e].steps.size() == 1);
    CHECK(t1[e].steps[0].actions == t2[e].steps[0].actions);
    CHECK(t1[e].steps[0].rewards == t2[e].steps[0].rewards);
    CHECK(t1[e].env_id == "one-step");
    CHECK(t1[e].final_obs.size() == 4);
    if (t1[e].steps[0].actions != t3[e].steps[0].actions) any_diff_seed_differs = true;
  }
  CHECK(any_diff_seed_differs);
}

TEST_CASE("uniform self-play in the one-step game breaks even") {
  env::OneStepRpsw game;
  test::StreamBag bag(42);
  std::vector<Mlp> nets;
  for (int a = 0; a < 4; ++a) nets.push_back(zero_net(1, 2));

  RolloutSpec spec;
  spec.env = &game;
  for (int a = 0; a < 4; ++a)
    spec.policies.push_back({&nets[static_cast<size_t>(a)], PolicyMode::StochasticSoftmax, 0, 0.0});
  spec.exec = ExecMode::Sample;
  spec.env_rng = &bag.get("env");
  spec.signal_rngs = {&bag.get("sig0"), &bag.get("sig1")};
  spec.action_rngs = {&bag.get("a0"), &bag.get("a1"), &bag.get("a2"), &bag.get("a3")};

  double total = 0.0;
  const int episodes = 4000;
  std::vector<int> joint_counts(4, 0);
  for (int ep = 0; ep < episodes; ++ep) {
    Trajectory t = run_episode(spec);
    total += t.steps[0].rewards[0];
    joint_counts[static_cast<size_t>(env::joint_action_index(
        t.steps[0].actions[0], t.steps[0].actions[1]))] += 1;
  }
  CHECK(std::abs(total / episodes) < 0.05);
  for (int c : joint_counts)
    CHECK(std::abs(c / static_cast<double>(episodes) - 0.25) < 0.03);
}

TEST_CASE("signalled rollouts feed z to the policy and record hiddens") {
  env::OneStepRpsw game;
  test::StreamBag bag(9);
  Rng init(2);
  std::vector<Mlp> nets;
  // Team 0 receives a 2-dim signal: input 1 + 2; team 1 plays unsignalled.
  nets.emplace_back(MlpSpec({3, 5, 2}, Activation::Tanh, OutputActivation::Softmax), init);
  nets.emplace_back(MlpSpec({3, 5, 2}, Activation::Tanh, OutputActivation::Softmax), init);
  nets.emplace_back(MlpSpec({1, 5, 2}, Activation::Tanh, OutputActivation::Softmax), init);
  nets.emplace_back(MlpSpec({1, 5, 2}, Activation::Tanh, OutputActivation::Softmax), init);

  RolloutSpec spec;
  spec.env = &game;
  spec.policies = {{&nets[0], PolicyMode::StochasticSoftmax, 2, 0.0},
                   {&nets[1], PolicyMode::StochasticSoftmax, 2, 0.0},
                   {&nets[2], PolicyMode::StochasticSoftmax, 0, 0.0},
                   {&nets[3], PolicyMode::StochasticSoftmax, 0, 0.0}};
  spec.exec = ExecMode::Sample;
  spec.env_rng = &bag.get("env");
  spec.signal_rngs = {&bag.get("sig0"), &bag.get("sig1")};
  spec.action_rngs = {&bag.get("a0"), &bag.get("a1"), &bag.get("a2"), &bag.get("a3")};
  spec.record_hiddens = true;

  Trajectory t = run_episode(spec);
  REQUIRE(t.team_signals.size() == 2);
  CHECK(t.team_signals[0].dim() == 2);
  CHECK(t.team_signals[1].dim() == 0);
  REQUIRE(t.steps.size() == 1);
  REQUIRE(t.steps[0].hiddens.size() == 4);
  for (const auto& h : t.steps[0].hiddens) CHECK(h.size() == 5);

  // The signalled net really consumes obs + z.
  std::vector<double> in{1.0};
  in.insert(in.end(), t.team_signals[0].values.begin(), t.team_signals[0].values.end());
  std::vector<double> out;
  nets[0].infer(in, out);
  CHECK(out.size() == 2);

  // The unsignalled team's z draw consumed nothing from its stream.
  Rng fresh(derive_stream(9, "sig1"));
  CHECK(bag.get("sig1").state() == fresh.state());
}

TEST_CASE("team_return and total_steps aggregate trajectories") {
  env::OneStepRpsw game;
  Trajectory t;
  TrajStep s;
  s.rewards = {1, 1, -1, -1};
  t.steps.push_back(s);
  t.steps.push_back(s);
  CHECK(t.team_return(0, game) == doctest::Approx(4.0));
  CHECK(t.team_return(1, game) == doctest::Approx(-4.0));
  CHECK(t.length() == 2);

  std::vector<Trajectory> v{t, t, Trajectory{}};
  CHECK(total_steps(v) == 4);
}

TEST_CASE("make_mlp_spec shapes and episode_mi_node wiring") {
  MlpSpec spec = make_mlp_spec(7, {16, 8}, 3, OutputActivation::Softmax);
  CHECK(spec.layer_sizes == std::vector<int>{7, 16, 8, 3});
  CHECK(spec.output_activation == OutputActivation::Softmax);
  REQUIRE(spec.hidden_activations.size() == 2);
  CHECK(spec.hidden_activations[0] == Activation::ReLU);

  // Zero U-Net against unit-variance signals: the loss is mean(z^2) rows.
  TeamEnvView view;
  view.team_id = 0;
  view.agents = {0, 1};
  view.all_obs_dims = {1, 1, 1, 1};
  view.all_n_actions = {2, 2, 2, 2};
  view.episode_length = 1;

  Rng init(4);
  int dz = 2;
  // state dim = team obs 2 ; hiddens 3 each -> input 2 + 6
  Mlp unet(make_mlp_spec(2 + 6, {4}, dz, OutputActivation::Identity), init);
  for (Tensor& p : unet.params()) std::fill(p.values.begin(), p.values.end(), 0.0);

  Trajectory traj;
  traj.team_signals.resize(2);
  traj.team_signals[0].values = {0.5, -1.5};
  TrajStep st;
  st.obs = {{1.0}, {1.0}, {1.0}, {1.0}};
  st.actions = {0, 1, 0, 1};
  st.rewards = {0, 0, 0, 0};
  traj.steps.push_back(st);
  std::vector<Trajectory> eps{traj};

  ad::Tape tape;
  Mlp h0(make_mlp_spec(1 + dz, {3}, 2, OutputActivation::Softmax), init);
  Mlp h1(make_mlp_spec(1 + dz, {3}, 2, OutputActivation::Softmax), init);
  std::vector<double> in0{1.0, 0.5, -1.5};
  Mlp::Fwd f0 = h0.forward(tape, tape.input(in0, 1, 3));
  Mlp::Fwd f1 = h1.forward(tape, tape.input(in0, 1, 3));
  std::vector<ad::NodeId> hiddens{f0.hidden, f1.hidden};
  ad::NodeId loss = episode_mi_node(tape, unet, view, dz, eps, hiddens);
  // reconstruction is all zeros -> loss = (0.25 + 2.25) / 2
  CHECK(tape.value(loss)[0] == doctest::Approx(1.25));
}
