#pragma once

#include <Eigen/Dense>

#include "gaitlab/cpg.hpp"

namespace gaitlab {

enum class ScenarioKind { Flat, Gap };

/// Linear walk/trot frequency-bound parameterization: the upper omega bound
/// grows linearly with the desired velocity.
struct FrequencyBound {
  double omega_max_1 = 23.0; // rad/s at v_min
  double omega_max_2 = 60.0; // rad/s at v_max
  double v_min = 0.3;        // m/s
  double v_max = 1.0;        // m/s

  double operator()(double v_des) const {
    return (omega_max_2 - omega_max_1) / (v_max - v_min) * (v_des - v_min) +
           omega_max_1;
  }

  static FrequencyBound walking() { return {23.0, 60.0, 0.3, 1.0}; }
  static FrequencyBound trotting() { return {30.0, 70.0, 0.9, 2.1}; }
};

/// Action bounds. Flat scenario: 8 dims (mu x4, omega x4) with the omega
/// upper bound set by the frequency-bound function of the desired velocity.
/// Gap scenario: 12 dims (mu x4, omega x4, x_off x4), omega in [0, 40] rad/s,
/// x_off in [-0.07, 0.07] m.
struct ActionSpec {
  ScenarioKind scenario = ScenarioKind::Gap;
  double mu_min = 0.5, mu_max = 4.0;
  double omega_min = 0.0, omega_max = 40.0; // gap scenario bound
  double x_off_limit = 0.07;                // m, gap scenario only
  FrequencyBound freq_bound = FrequencyBound::walking();

  int dim() const { return scenario == ScenarioKind::Flat ? 8 : 12; }
};

struct ScaledAction {
  CpgDrives drives;
  Eigen::Vector4d x_off = Eigen::Vector4d::Zero();
};

/// Affine map from raw [-1, 1] actions to drive bounds; out-of-range raw
/// values are clamped first.
ScaledAction action_to_drives(const Eigen::VectorXd& raw, const ActionSpec& spec,
                              double v_des);

} // namespace gaitlab
