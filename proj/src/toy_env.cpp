#include "gaitlab/toy_env.hpp"

#include <algorithm>
#include <cmath>

namespace gaitlab {

ToyVelocityEnv::ToyVelocityEnv(uint64_t seed, int horizon)
    : rng_(seed), horizon_(horizon), obs_(kObsDim) {
  reset();
}

Eigen::VectorXd ToyVelocityEnv::reset() {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  v_ = 0.0;
  v_des_ = dist(rng_);
  steps_ = 0;
  done_ = false;
  obs_ << v_, v_des_;
  return obs_;
}

double ToyVelocityEnv::step(const Eigen::VectorXd& action) {
  v_ = std::clamp(action[0], -2.0, 2.0);
  const double err = v_ - v_des_;
  const double reward = std::exp(-err * err / 0.25);
  ++steps_;
  if (steps_ >= horizon_) done_ = true;
  obs_ << v_, v_des_;
  return reward;
}

} // namespace gaitlab
