#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "gaitlab/mlp.hpp"

namespace gaitlab {

struct PpoConfig {
  int batch_size = 4096;
  int minibatch_size = 128;
  int epochs = 10;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double desired_kl = 0.01;
  double learning_rate = 1e-4;
  double value_coef = 0.5;
  double log_std_min = -4.0;
  double log_std_max = 1.0;
};

struct RolloutBuffer {
  std::vector<Eigen::VectorXd> observations;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;
  std::vector<double> bootstrap_values; // value after each step (0 if done)
  std::vector<double> advantages;       // filled by gae before the update
  std::vector<double> returns;

  int size() const { return static_cast<int>(observations.size()); }
  void clear();
  /// Run gae() over the stored transitions and fill advantages/returns.
  void compute_gae(double gamma, double lambda);
};

/// Generalized advantage estimation with resets at done flags. Returns
/// (advantages, returns) with returns = advantages + values.
std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<bool>& dones, const std::vector<double>& bootstrap_values,
    double gamma, double lambda);

struct PpoStats {
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  int epochs_run = 0;
};

/// Minimal environment interface for rollout collection.
class Env {
 public:
  virtual ~Env() = default;
  virtual Eigen::VectorXd reset() = 0;
  virtual double step(const Eigen::VectorXd& action) = 0;
  virtual const Eigen::VectorXd& observation() const = 0;
  virtual bool done() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>(uint64_t seed)>;

/// Adam state for one policy (actor + critic + log_std).
struct AdamState {
  std::vector<Eigen::MatrixXd> mW_a, vW_a, mW_c, vW_c;
  std::vector<Eigen::VectorXd> mb_a, vb_a, mb_c, vb_c;
  Eigen::VectorXd m_ls, v_ls;
  long step = 0;
  void init(const Policy& p);
};

/// One PPO update over a filled buffer: shuffled minibatches, clipped
/// surrogate with entropy bonus and value loss, per-batch advantage
/// normalization, and early stop of the epoch loop when the mean approximate
/// KL exceeds 1.5 * desired_kl.
PpoStats ppo_update(Policy& policy, AdamState& adam, const RolloutBuffer& buffer,
                    const PpoConfig& cfg, std::mt19937_64& rng);

struct TrainPoint {
  long samples = 0;
  double mean_episode_return = 0.0;
  double mean_kl = 0.0;
};

struct TrainResult {
  Policy policy;
  std::vector<TrainPoint> curve;
};

/// Vectorized rollout -> GAE -> ppo_update loop. Deterministic given the seed
/// and environment count; environments are seeded per index and stepped in
/// index order.
TrainResult train(const EnvFactory& factory, int num_envs, long total_samples,
                  const PpoConfig& cfg, const std::vector<int>& hidden,
                  Activation act, int obs_dim, int action_dim, uint64_t seed,
                  const std::function<void(const TrainPoint&, const Policy&)>&
                      on_update = nullptr);

} // namespace gaitlab
