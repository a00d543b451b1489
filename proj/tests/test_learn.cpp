#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitlab/ppo.hpp"
#include "gaitlab/toy_env.hpp"

using namespace gaitlab;

namespace {

// Scalar loss L = g . f(x) so dL/dtheta comes straight out of backward().
double directional_output(const Mlp& net, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& g) {
  return g.dot(net.forward(x));
}

} // namespace

TEST_CASE("Mlp forward matches a hand-computed two-layer network") {
  std::mt19937_64 rng(1);
  Mlp net({2, 2, 1}, Activation::Tanh, rng);
  net.weights()[0] << 1.0, -2.0, 0.5, 0.25;
  net.biases()[0] << 0.1, -0.1;
  net.weights()[1] << 2.0, -1.0;
  net.biases()[1] << 0.05;

  const Eigen::Vector2d x(0.3, -0.7);
  const double h0 = std::tanh(1.0 * 0.3 + (-2.0) * (-0.7) + 0.1);
  const double h1 = std::tanh(0.5 * 0.3 + 0.25 * (-0.7) - 0.1);
  const double expect = 2.0 * h0 - 1.0 * h1 + 0.05;
  const Eigen::VectorXd y = net.forward(x);
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("elu hidden activation") {
    Mlp enet({2, 2, 1}, Activation::Elu, rng);
    enet.weights() = net.weights();
    enet.biases() = net.biases();
    auto elu = [](double z) { return z > 0.0 ? z : std::exp(z) - 1.0; };
    const double e0 = elu(1.0 * 0.3 + (-2.0) * (-0.7) + 0.1);
    const double e1 = elu(0.5 * 0.3 + 0.25 * (-0.7) - 0.1);
    CHECK(enet.forward(x)[0] ==
          doctest::Approx(2.0 * e0 - 1.0 * e1 + 0.05).epsilon(1e-12));
  }
}

TEST_CASE("Mlp backward matches central finite differences") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Activation act = seed % 2 == 0 ? Activation::Tanh : Activation::Elu;
    Mlp net({16, 32, 32, 8}, act, rng);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd x(16), g(8);
    for (int i = 0; i < 16; ++i) x[i] = n(rng);
    for (int i = 0; i < 8; ++i) g[i] = n(rng);

    Mlp::Cache cache;
    net.forward(x, &cache);
    Mlp::Gradients grads = net.zero_gradients();
    net.backward(cache, g, grads);

    const double h = 1e-6;
    double worst = 0.0;
    for (int layer = 0; layer < net.num_layers(); ++layer) {
      auto check_param = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + h;
        const double up = directional_output(net, x, g);
        p = saved - h;
        const double dn = directional_output(net, x, g);
        p = saved;
        const double fd = (up - dn) / (2.0 * h);
        worst = std::max(worst,
                         std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
      };
      Eigen::MatrixXd& W = net.weights()[layer];
      for (int r = 0; r < W.rows(); ++r)
        for (int c = 0; c < W.cols(); ++c)
          check_param(W(r, c), grads.dW[layer](r, c));
      Eigen::VectorXd& b = net.biases()[layer];
      for (int r = 0; r < b.size(); ++r) check_param(b[r], grads.db[layer][r]);
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
  std::mt19937_64 rng(9);
  Mlp net({4, 8, 3}, Activation::Tanh, rng);
  Mlp::Cache cache;
  net.forward(Eigen::VectorXd::Constant(4, 0.3), &cache);
  Mlp::Gradients grads = net.zero_gradients();
  net.backward(cache, Eigen::VectorXd::Zero(3), grads);
  for (int l = 0; l < net.num_layers(); ++l) {
    CHECK(grads.dW[l].isZero(0.0));
    CHECK(grads.db[l].isZero(0.0));
  }
}

TEST_CASE("diagonal Gaussian log-prob") {
  std::mt19937_64 rng(3);
  Policy p(2, 3, {8}, Activation::Tanh, rng);
  p.log_std << -0.5, 0.0, 0.25;
  const Eigen::VectorXd obs = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd mean = p.mean_action(obs);

  // At the mean: -sum(log_std + 0.5 log 2 pi).
  const double at_mean = p.log_prob(mean, mean);
  const double expect =
      -(p.log_std.sum() + 1.5 * std::log(2.0 * M_PI));
  CHECK(at_mean == doctest::Approx(expect).epsilon(1e-12));

  // One sigma off in a single coordinate drops exactly 1/2.
  Eigen::VectorXd a = mean;
  a[1] += std::exp(p.log_std[1]);
  CHECK(p.log_prob(mean, a) == doctest::Approx(at_mean - 0.5).epsilon(1e-12));

  // Sampled actions agree with the reported log-probability.
  for (int k = 0; k < 100; ++k) {
    const auto [act, lp] = p.sample(obs, rng);
    CHECK(lp == doctest::Approx(p.log_prob(mean, act)).epsilon(1e-10));
  }
}

TEST_CASE("gae matches a brute-force discounted sum of TD residuals") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 100);
  std::bernoulli_distribution done_draw(0.1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    std::vector<double> r(n), v(n), bv(n);
    std::vector<bool> d(n);
    for (int t = 0; t < n; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
      bv[t] = u(rng);
      d[t] = done_draw(rng);
    }
    const double gamma = 0.99, lambda = 0.95;
    const auto [adv, ret] = gae(r, v, d, bv, gamma, lambda);

    for (int t = 0; t < n; ++t) {
      double expect = 0.0, w = 1.0;
      for (int s = t; s < n; ++s) {
        const double next = d[s] ? 0.0 : bv[s];
        expect += w * (r[s] + gamma * next - v[s]);
        if (d[s]) break;
        w *= gamma * lambda;
      }
      CHECK(std::abs(adv[t] - expect) < 1e-10);
      CHECK(std::abs(ret[t] - (adv[t] + v[t])) < 1e-12);
    }
  }
  SUBCASE("lambda = 0 reduces to one-step TD residuals") {
    const auto [adv, ret] =
        gae({1.0, 2.0}, {0.5, 0.25}, {false, false}, {0.25, 0.75}, 0.9, 0.0);
    CHECK(adv[0] == doctest::Approx(1.0 + 0.9 * 0.25 - 0.5));
    CHECK(adv[1] == doctest::Approx(2.0 + 0.9 * 0.75 - 0.25));
  }
  SUBCASE("gamma = lambda = 1 gives the undiscounted residual sum") {
    const auto [adv, ret] =
        gae({1.0, 1.0, 1.0}, {0.2, 0.3, 0.4}, {false, false, true},
            {0.3, 0.4, 0.0}, 1.0, 1.0);
    // Telescoping: adv[0] = r0 + r1 + r2 - v0 when bootstraps chain values.
    CHECK(adv[0] == doctest::Approx(3.0 - 0.2));
  }
}

namespace {

RolloutBuffer make_buffer(Policy& p, int n, std::mt19937_64& rng,
                          bool zero_advantages) {
  RolloutBuffer buf;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd obs(p.actor.input_dim());
    for (int k = 0; k < obs.size(); ++k) obs[k] = nd(rng);
    const auto [act, lp] = p.sample(obs, rng);
    buf.observations.push_back(obs);
    buf.actions.push_back(act);
    buf.log_probs.push_back(lp);
    buf.values.push_back(p.value(obs));
    buf.rewards.push_back(nd(rng));
    buf.dones.push_back(false);
    buf.bootstrap_values.push_back(0.0);
    buf.advantages.push_back(zero_advantages ? 0.0 : nd(rng));
    // Keep the value target off the current prediction so the critic always
    // has something to regress toward.
    buf.returns.push_back(buf.values.back() + buf.advantages.back() + 1.0);
  }
  return buf;
}

} // namespace

TEST_CASE("ppo_update edge cases") {
  std::mt19937_64 rng(21);
  Policy p(4, 2, {16}, Activation::Tanh, rng);

  SUBCASE("zero learning rate leaves every parameter untouched") {
    const Policy before = p;
    AdamState adam;
    adam.init(p);
    RolloutBuffer buf = make_buffer(p, 256, rng, false);
    PpoConfig cfg;
    cfg.batch_size = 256;
    cfg.minibatch_size = 64;
    cfg.learning_rate = 0.0;
    const PpoStats stats = ppo_update(p, adam, buf, cfg, rng);
    CHECK(stats.mean_kl == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(stats.clip_fraction == 0.0);
    for (int l = 0; l < p.actor.num_layers(); ++l) {
      CHECK(p.actor.weights()[l] == before.actor.weights()[l]);
      CHECK(p.critic.weights()[l] == before.critic.weights()[l]);
    }
    CHECK(p.log_std == before.log_std);
  }

  SUBCASE("zero advantages with no entropy bonus leave the actor untouched") {
    const Policy before = p;
    AdamState adam;
    adam.init(p);
    RolloutBuffer buf = make_buffer(p, 256, rng, true);
    PpoConfig cfg;
    cfg.batch_size = 256;
    cfg.minibatch_size = 64;
    cfg.entropy_coef = 0.0;
    cfg.learning_rate = 1e-3;
    ppo_update(p, adam, buf, cfg, rng);
    for (int l = 0; l < p.actor.num_layers(); ++l) {
      CHECK(p.actor.weights()[l] == before.actor.weights()[l]);
      CHECK(p.actor.biases()[l] == before.actor.biases()[l]);
    }
    CHECK(p.log_std == before.log_std);
    // The critic still regresses toward the returns.
    bool critic_moved = false;
    for (int l = 0; l < p.critic.num_layers(); ++l)
      critic_moved = critic_moved || p.critic.weights()[l] != before.critic.weights()[l];
    CHECK(critic_moved);
  }

  SUBCASE("an update raises the clipped surrogate objective") {
    AdamState adam;
    adam.init(p);
    RolloutBuffer buf = make_buffer(p, 512, rng, false);
    PpoConfig cfg;
    cfg.batch_size = 512;
    cfg.minibatch_size = 128;
    cfg.entropy_coef = 0.0;
    cfg.learning_rate = 1e-3;
    cfg.desired_kl = 1e9; // no early stop for this check

    // Normalized advantages, as used inside the update.
    const int n = buf.size();
    double mean = 0.0, sq = 0.0;
    for (double a : buf.advantages) mean += a;
    mean /= n;
    for (double a : buf.advantages) sq += (a - mean) * (a - mean);
    const double stdev = std::sqrt(sq / n) + 1e-8;

    auto surrogate = [&](const Policy& pol) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lp =
            pol.log_prob(pol.mean_action(buf.observations[i]), buf.actions[i]);
        const double ratio = std::exp(lp - buf.log_probs[i]);
        const double adv = (buf.advantages[i] - mean) / stdev;
        total += std::min(ratio * adv,
                          std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv);
      }
      return total / n;
    };
    const double before = surrogate(p);
    ppo_update(p, adam, buf, cfg, rng);
    CHECK(surrogate(p) > before);
  }

  SUBCASE("log_std stays inside its clamp bounds") {
    AdamState adam;
    adam.init(p);
    PpoConfig cfg;
    cfg.batch_size = 256;
    cfg.minibatch_size = 64;
    cfg.learning_rate = 0.5; // huge steps to push against the bounds
    for (int it = 0; it < 5; ++it) {
      RolloutBuffer buf = make_buffer(p, 256, rng, false);
      ppo_update(p, adam, buf, cfg, rng);
      for (int i = 0; i < p.log_std.size(); ++i) {
        CHECK(p.log_std[i] >= cfg.log_std_min);
        CHECK(p.log_std[i] <= cfg.log_std_max);
      }
    }
  }
}

TEST_CASE("toy training improves and is seed-reproducible") {
  const EnvFactory factory = [](uint64_t seed) {
    return std::make_unique<ToyVelocityEnv>(seed);
  };
  PpoConfig cfg;
  cfg.batch_size = 2000;
  cfg.minibatch_size = 100;
  cfg.learning_rate = 3e-3;
  const auto run = [&](uint64_t seed) {
    return train(factory, 4, 20000, cfg, {32, 32}, Activation::Tanh,
                 ToyVelocityEnv::kObsDim, ToyVelocityEnv::kActionDim, seed);
  };
  const TrainResult a = run(5);
  const TrainResult b = run(5);
  REQUIRE(!a.curve.empty());
  REQUIRE(a.curve.size() == b.curve.size());
  for (size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].samples == b.curve[i].samples);
    CHECK(a.curve[i].mean_episode_return == b.curve[i].mean_episode_return);
  }
  for (int l = 0; l < a.policy.actor.num_layers(); ++l)
    CHECK(a.policy.actor.weights()[l] == b.policy.actor.weights()[l]);

  // Return should improve over the run (short budget: just a clear trend).
  CHECK(a.curve.back().mean_episode_return > a.curve.front().mean_episode_return);

  const TrainResult c = run(6);
  CHECK(c.curve.back().mean_episode_return !=
        a.curve.back().mean_episode_return);
}

TEST_CASE("Policy serialization round trip") {
  std::mt19937_64 rng(77);
  Policy p(6, 3, {12, 8}, Activation::Elu, rng);
  p.log_std << -1.0, 0.2, 0.9;
  const Policy q = Policy::deserialize(p.serialize());
  CHECK(q.actor.sizes() == p.actor.sizes());
  CHECK(q.actor.activation() == Activation::Elu);
  for (int l = 0; l < p.actor.num_layers(); ++l) {
    CHECK(q.actor.weights()[l] == p.actor.weights()[l]);
    CHECK(q.actor.biases()[l] == p.actor.biases()[l]);
    CHECK(q.critic.weights()[l] == p.critic.weights()[l]);
    CHECK(q.critic.biases()[l] == p.critic.biases()[l]);
  }
  CHECK(q.log_std == p.log_std);
  // Identical behaviour on a probe input.
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  CHECK(q.mean_action(x) == p.mean_action(x));
  CHECK(q.value(x) == p.value(x));
}
