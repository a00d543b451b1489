#pragma once

#include <random>

#include "gaitlab/ppo.hpp"

namespace gaitlab {

/// 1D point-mass velocity tracking. The action directly commands the mass
/// velocity (clamped to [-2, 2]); the reward is exp(-(v - v_des)^2 / 0.25)
/// per step with v_des resampled uniformly from [-1, 1] at each reset. The
/// optimal deterministic return over one episode is exactly the horizon.
class ToyVelocityEnv : public Env {
 public:
  explicit ToyVelocityEnv(uint64_t seed, int horizon = 50);

  Eigen::VectorXd reset() override;
  double step(const Eigen::VectorXd& action) override;
  const Eigen::VectorXd& observation() const override { return obs_; }
  bool done() const override { return done_; }

  static constexpr int kObsDim = 2;
  static constexpr int kActionDim = 1;
  double optimal_return() const { return static_cast<double>(horizon_); }

 private:
  std::mt19937_64 rng_;
  int horizon_;
  int steps_ = 0;
  double v_ = 0.0;
  double v_des_ = 0.0;
  bool done_ = false;
  Eigen::VectorXd obs_;
};

} // namespace gaitlab
