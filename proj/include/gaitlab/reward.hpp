#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "gaitlab/kinematics.hpp"

namespace gaitlab {

/// Flat-terrain reward weights (forward progress, velocity tracking, power,
/// orientation).
struct RewardWeightsFlat {
  double a1 = 0.03;
  double a2 = 0.03;
  double a3 = -0.00001;
  double a4 = -0.02;
};

enum class WeightLevel { Low, Medium, High };
const char* weight_level_name(WeightLevel l);

/// Gap-terrain reward weights (viability, peak force, power, orientation).
struct RewardWeightsGap {
  double a1 = 8.0;       // viability: 0.1 / 4.0 / 8.0
  double a2 = -0.0001;   // peak force: -0.0001 / -0.001 / -0.01
  double a3 = -0.00001;  // power: -0.00001 / -0.0001 / -0.001
  double a4 = -0.25;
  double f_c_max = 180.0; // N
};

/// One control-cycle transition, as seen by the reward functions.
struct TransitionData {
  double f_x = 0.0;      // forward displacement over the cycle, m
  double d_max = 0.01;   // progress cap, m (1 m/s at 100 Hz)
  double v_des = 0.0;    // m/s
  double v_real = 0.0;   // m/s
  Vec12 tau = Vec12::Zero();
  Vec12 q_dot_now = Vec12::Zero();
  Vec12 q_dot_prev = Vec12::Zero();
  Vec3 orientation_error = Vec3::Zero(); // roll/pitch/yaw vs level
  Eigen::Vector4d contact_forces = Eigen::Vector4d::Zero(); // N
};

struct RewardBreakdown {
  double total = 0.0;
  std::array<double, 4> terms = {0.0, 0.0, 0.0, 0.0};
};

/// r1 = a1*min(f_x, d_max) + a2*exp(-|v_des - v_real|^2 / 0.25)
///    + a3*|tau . (q_dot - q_dot_prev)| + a4*|o_base - o_zero|
RewardBreakdown reward_flat(const TransitionData& td, const RewardWeightsFlat& w);

/// r2 = a1*min(f_x, d_max) + a2*sum_i max(0, F_c_i - F_c_max)
///    + a3*|tau . (q_dot - q_dot_prev)| + a4*|o_base - o_zero|
RewardBreakdown reward_gap(const TransitionData& td, const RewardWeightsGap& w);

/// One cell of the 27-policy weight sweep.
struct WeightGridCell {
  int case_index = 0; // 1-based
  WeightLevel viability, cot, force;
  RewardWeightsGap weights;
  std::string label() const;
};

/// All 27 (viability, CoT, force) x (low, medium, high) combinations. Case
/// index = 9*viability + 3*cot + force + 1 with levels ordered low, medium,
/// high, so (low,low,low) is case 1 and (high,low,low) is case 19.
std::vector<WeightGridCell> weight_grid();

} // namespace gaitlab
