#include "gaitlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gaitlab {

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  bootstrap_values.clear();
  advantages.clear();
  returns.clear();
}

std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<bool>& dones, const std::vector<double>& bootstrap_values,
    double gamma, double lambda) {
  const int n = static_cast<int>(rewards.size());
  std::vector<double> adv(n), ret(n);
  double running = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next_value = dones[t] ? 0.0 : bootstrap_values[t];
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = dones[t] ? delta : delta + gamma * lambda * running;
    adv[t] = running;
    ret[t] = adv[t] + values[t];
  }
  return {adv, ret};
}

void RolloutBuffer::compute_gae(double gamma, double lambda) {
  auto [a, r] = gae(rewards, values, dones, bootstrap_values, gamma, lambda);
  advantages = std::move(a);
  returns = std::move(r);
}

void AdamState::init(const Policy& p) {
  auto zeros_like_W = [](const std::vector<Eigen::MatrixXd>& Ws) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& W : Ws) out.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
    return out;
  };
  auto zeros_like_b = [](const std::vector<Eigen::VectorXd>& bs) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& b : bs) out.push_back(Eigen::VectorXd::Zero(b.size()));
    return out;
  };
  mW_a = zeros_like_W(p.actor.weights());
  vW_a = zeros_like_W(p.actor.weights());
  mb_a = zeros_like_b(p.actor.biases());
  vb_a = zeros_like_b(p.actor.biases());
  mW_c = zeros_like_W(p.critic.weights());
  vW_c = zeros_like_W(p.critic.weights());
  mb_c = zeros_like_b(p.critic.biases());
  vb_c = zeros_like_b(p.critic.biases());
  m_ls = Eigen::VectorXd::Zero(p.log_std.size());
  v_ls = Eigen::VectorXd::Zero(p.log_std.size());
  step = 0;
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename T>
void adam_step(T& param, T& m, T& v, const T& grad, double lr, long t) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
  v = (kAdamBeta2 * v.array() + (1.0 - kAdamBeta2) * grad.array().square()).matrix();
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

} // namespace

PpoStats ppo_update(Policy& policy, AdamState& adam, const RolloutBuffer& buffer,
                    const PpoConfig& cfg, std::mt19937_64& rng) {
  const int n = buffer.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  if (buffer.advantages.size() != static_cast<size_t>(n))
    throw std::invalid_argument("ppo_update: advantages not computed");

  // Per-batch advantage normalization.
  double mean = std::accumulate(buffer.advantages.begin(),
                                buffer.advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : buffer.advantages) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / n);
  std::vector<double> adv(n);
  for (int i = 0; i < n; ++i)
    adv[i] = (buffer.advantages[i] - mean) / (stddev + 1e-8);

  PpoStats stats;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int adim = static_cast<int>(policy.log_std.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double kl_sum = 0.0, clip_count = 0.0, ploss_sum = 0.0, vloss_sum = 0.0;

    for (int start = 0; start < n; start += cfg.minibatch_size) {
      const int end = std::min(n, start + cfg.minibatch_size);
      const int mb = end - start;

      Mlp::Gradients ga = policy.actor.zero_gradients();
      Mlp::Gradients gc = policy.critic.zero_gradients();
      Eigen::VectorXd g_ls = Eigen::VectorXd::Zero(adim);

      for (int k = start; k < end; ++k) {
        const int i = order[k];
        const Eigen::VectorXd& obs = buffer.observations[i];
        const Eigen::VectorXd& act = buffer.actions[i];

        Mlp::Cache ca;
        const Eigen::VectorXd mu = policy.actor.forward(obs, &ca);
        const double lp_new = policy.log_prob(mu, act);
        const double ratio = std::exp(lp_new - buffer.log_probs[i]);
        const double a = adv[i];

        kl_sum += (ratio - 1.0) - std::log(std::max(ratio, 1e-12));

        const bool clipped = (a >= 0.0 && ratio > 1.0 + cfg.clip) ||
                             (a < 0.0 && ratio < 1.0 - cfg.clip);
        if (clipped) clip_count += 1.0;
        ploss_sum -= std::min(ratio * a,
                              std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a);

        // Objective per sample: surrogate + entropy bonus - value loss.
        // Accumulated as gradients of the negated objective (minimized).
        if (!clipped) {
          const double dJ_dlp = ratio * a; // d(ratio*a)/d lp_new
          Eigen::VectorXd dlp_dmu(adim);
          for (int d = 0; d < adim; ++d) {
            const double sd = std::exp(policy.log_std[d]);
            const double z = (act[d] - mu[d]) / sd;
            dlp_dmu[d] = z / sd;
            g_ls[d] += -dJ_dlp * (z * z - 1.0) / mb;
          }
          policy.actor.backward(ca, (-dJ_dlp / mb) * dlp_dmu, ga);
        }
        // Entropy bonus gradient: dH/dlog_std = 1 per dimension.
        g_ls.array() -= cfg.entropy_coef / mb;

        Mlp::Cache cc;
        const double v = policy.critic.forward(obs, &cc)[0];
        const double verr = v - buffer.returns[i];
        vloss_sum += verr * verr;
        Eigen::VectorXd gv(1);
        gv[0] = cfg.value_coef * 2.0 * verr / mb;
        policy.critic.backward(cc, gv, gc);
      }

      ++adam.step;
      for (int l = 0; l < policy.actor.num_layers(); ++l) {
        adam_step(policy.actor.weights()[l], adam.mW_a[l], adam.vW_a[l],
                  ga.dW[l], cfg.learning_rate, adam.step);
        adam_step(policy.actor.biases()[l], adam.mb_a[l], adam.vb_a[l],
                  ga.db[l], cfg.learning_rate, adam.step);
      }
      for (int l = 0; l < policy.critic.num_layers(); ++l) {
        adam_step(policy.critic.weights()[l], adam.mW_c[l], adam.vW_c[l],
                  gc.dW[l], cfg.learning_rate, adam.step);
        adam_step(policy.critic.biases()[l], adam.mb_c[l], adam.vb_c[l],
                  gc.db[l], cfg.learning_rate, adam.step);
      }
      adam_step(policy.log_std, adam.m_ls, adam.v_ls, g_ls, cfg.learning_rate,
                adam.step);
      for (int d = 0; d < adim; ++d)
        policy.log_std[d] =
            std::clamp(policy.log_std[d], cfg.log_std_min, cfg.log_std_max);
    }

    stats.mean_kl = kl_sum / n;
    stats.clip_fraction = clip_count / n;
    stats.policy_loss = ploss_sum / n;
    stats.value_loss = vloss_sum / n;
    stats.epochs_run = epoch + 1;
    if (stats.mean_kl > 1.5 * cfg.desired_kl) break; // KL early stop
  }
  return stats;
}

TrainResult train(const EnvFactory& factory, int num_envs, long total_samples,
                  const PpoConfig& cfg, const std::vector<int>& hidden,
                  Activation act, int obs_dim, int action_dim, uint64_t seed,
                  const std::function<void(const TrainPoint&, const Policy&)>&
                      on_update) {
  std::mt19937_64 rng(seed);
  TrainResult result;
  result.policy = Policy(obs_dim, action_dim, hidden, act, rng);
  AdamState adam;
  adam.init(result.policy);

  std::vector<std::unique_ptr<Env>> envs;
  std::vector<std::mt19937_64> env_rngs;
  for (int e = 0; e < num_envs; ++e) {
    envs.push_back(factory(seed * 1000003ULL + static_cast<uint64_t>(e)));
    env_rngs.emplace_back(seed * 7919ULL + static_cast<uint64_t>(e));
    envs.back()->reset();
  }

  const int steps_per_env = std::max(1, cfg.batch_size / num_envs);
  long samples = 0;
  std::vector<double> episode_returns;
  std::vector<double> running_return(num_envs, 0.0);

  while (samples < total_samples) {
    RolloutBuffer buffer;
    for (int e = 0; e < num_envs; ++e) {
      Env& env = *envs[e];
      const int seg_start = buffer.size();
      for (int t = 0; t < steps_per_env; ++t) {
        const Eigen::VectorXd obs = env.observation();
        auto [action, lp] = result.policy.sample(obs, env_rngs[e]);
        const double value = result.policy.value(obs);
        double reward;
        bool step_done;
        try {
          reward = env.step(action);
          step_done = env.done();
        } catch (const std::exception&) {
          // Diverged episode: discard its tail, restart the env.
          env.reset();
          running_return[e] = 0.0;
          continue;
        }
        buffer.observations.push_back(obs);
        buffer.actions.push_back(action);
        buffer.log_probs.push_back(lp);
        buffer.rewards.push_back(reward);
        buffer.values.push_back(value);
        buffer.dones.push_back(step_done);
        buffer.bootstrap_values.push_back(0.0);
        running_return[e] += reward;
        if (step_done) {
          episode_returns.push_back(running_return[e]);
          running_return[e] = 0.0;
          env.reset();
        }
      }
      // Bootstrap values within this env's segment: the stored value of the
      // next step, and a fresh critic evaluation at the segment end.
      const int seg_end = buffer.size();
      for (int i = seg_start; i < seg_end; ++i) {
        if (buffer.dones[i]) continue;
        buffer.bootstrap_values[i] = i + 1 < seg_end
                                         ? buffer.values[i + 1]
                                         : result.policy.value(env.observation());
      }
    }

    if (buffer.size() == 0) continue;
    buffer.compute_gae(cfg.gamma, cfg.gae_lambda);
    const PpoStats stats = ppo_update(result.policy, adam, buffer, cfg, rng);
    samples += buffer.size();

    TrainPoint point;
    point.samples = samples;
    point.mean_kl = stats.mean_kl;
    if (!episode_returns.empty()) {
      const size_t tail = std::min<size_t>(episode_returns.size(), 20);
      double s = 0.0;
      for (size_t k = episode_returns.size() - tail; k < episode_returns.size(); ++k)
        s += episode_returns[k];
      point.mean_episode_return = s / static_cast<double>(tail);
    }
    result.curve.push_back(point);
    if (on_update) on_update(point, result.policy);
  }
  return result;
}

} // namespace gaitlab
