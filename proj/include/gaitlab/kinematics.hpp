#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "gaitlab/cpg.hpp"

namespace gaitlab {

using Vec3 = Eigen::Vector3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

struct WorkspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Foot-trajectory shaping parameters for the pattern-formation layer.
struct FootTrajectoryParams {
  double l_step = 0.05;  // half step length, m
  double h = 0.25;       // nominal leg length, m
  double l_clrnc = 0.06; // max swing clearance, m
  double l_pntr = 0.01;  // max stance penetration, m
  Eigen::Vector4d x_off = Eigen::Vector4d::Zero(); // horizontal set-points, m
};

/// 3-DOF leg chain: hip-roll about x, hip-pitch about y, knee about y, with a
/// lateral hip link between roll and pitch axes. Hip frames are axis-aligned
/// with the trunk. Default dimensions match an A1-class quadruped.
struct LegGeometry {
  double l_hip = 0.0838;
  double l_thigh = 0.20;
  double l_calf = 0.20;
  std::array<Vec3, 4> hip_positions = {
      Vec3(0.18, 0.047, 0.0), Vec3(0.18, -0.047, 0.0),
      Vec3(-0.18, 0.047, 0.0), Vec3(-0.18, -0.047, 0.0)};
  std::array<double, 4> lateral_sign = {+1.0, -1.0, +1.0, -1.0};
};

struct JointState {
  Vec12 q = Vec12::Zero();
  Vec12 q_dot = Vec12::Zero();
};

struct PdGains {
  double kp = 100.0;     // N*m/rad
  double kd = 2.0;       // N*m*s/rad
  double tau_max = 33.5; // N*m
};

/// Desired foot position in the hip frame from oscillator state (x and z from
/// the swing/stance trajectory, y pinned at the lateral hip offset):
///   x = x_off - l_step * r * cos(theta)
///   z = -h + l_clrnc * sin(theta)  if sin(theta) > 0, else -h + l_pntr * sin(theta)
Vec3 foot_target(double theta, double r, const FootTrajectoryParams& params,
                 const LegGeometry& geom, int leg_index);

/// Closed-form IK for the 3-DOF leg, knee-backward branch only. Throws
/// WorkspaceError (message carries the violated bound) on unreachable targets.
Vec3 leg_ik(const Vec3& p, const LegGeometry& geom, int leg_index);

/// Forward kinematics of the same chain; foot position in the hip frame.
Vec3 leg_fk(const Vec3& q_leg, const LegGeometry& geom, int leg_index);

/// Foot Jacobian d(foot position)/d(q_leg) in the hip frame, 3x3.
Eigen::Matrix3d leg_jacobian(const Vec3& q_leg, const LegGeometry& geom, int leg_index);

/// Project a hip-frame target with y = lateral_sign * l_hip into the reachable
/// annulus of the pitch plane (margin eps). Targets already reachable pass
/// through unchanged.
Vec3 clamp_to_workspace(const Vec3& p, const LegGeometry& geom, int leg_index,
                        double eps = 1e-3);

/// tau_j = clamp(kp * (q_des_j - q_j) - kd * q_dot_j, +-tau_max).
Vec12 pd_torque(const Vec12& q_des, const JointState& js, const PdGains& gains);

} // namespace gaitlab
