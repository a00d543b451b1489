#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <optional>
#include <stdexcept>

#include "gaitlab/kinematics.hpp"
#include "gaitlab/terrain.hpp"

namespace gaitlab {

struct SimDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrunkState {
  Vec3 p = Vec3(0.0, 0.0, 0.25);                      // world position, m
  Eigen::Quaterniond R = Eigen::Quaterniond::Identity(); // body-to-world
  Vec3 v = Vec3::Zero();                              // world linear velocity, m/s
  Vec3 w = Vec3::Zero();                              // body angular velocity, rad/s
};

/// Rigid trunk with massless legs; joint dynamics use a reflected inertia so
/// contact loads propagate to the joints without articulated-body dynamics.
struct RobotModel {
  double mass = 12.0;                        // kg
  Eigen::Matrix3d inertia =
      Eigen::Vector3d(0.13, 0.25, 0.30).asDiagonal(); // kg*m^2, body frame
  LegGeometry geom;
  PdGains gains;
  double joint_reflected_inertia = 0.05;     // kg*m^2
  double body_length = 0.36;                 // m
};

/// Spring-damper ground contact with an anchored Coulomb friction model.
struct ContactParams {
  double k_n = 1e4;  // normal stiffness, N/m
  double d_n = 200;  // normal damping, N*s/m
  double k_t = 5e3;  // tangential stiffness, N/m
  double d_t = 50;   // tangential damping, N*s/m
  double mu = 0.8;   // friction coefficient
  double g = 9.81;   // m/s^2
};

struct ContactRecord {
  std::array<bool, 4> in_contact = {false, false, false, false};
  Eigen::Vector4d normal_force = Eigen::Vector4d::Zero(); // N
  std::array<Eigen::Vector2d, 4> anchor = {
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  std::array<Eigen::Vector2d, 4> tangential_force = {
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()}; // N
};

/// Ground reaction force on one foot (world frame). Normal force is a
/// penetration spring-damper; tangential force is an anchor spring clamped to
/// the friction cone, with anchor slip on saturation. Updates the record slot.
Vec3 contact_force(const Vec3& foot_p, const Vec3& foot_v, ContactRecord& rec,
                   int leg_index, const Terrain& terrain, const ContactParams& cfg);

struct WorldStepResult {
  TrunkState trunk;
  JointState joints;
  ContactRecord contacts;
  Vec12 torques;
  std::array<Vec3, 4> foot_world; // foot positions after the step, m
};

/// One 1 kHz physics step: PD torques, contact forces at the feet, joint
/// integration against the reflected inertia, and Newton-Euler trunk dynamics,
/// all semi-implicit Euler. Throws SimDiverged on non-finite state.
WorldStepResult step_world(const TrunkState& trunk, const JointState& js,
                           const Vec12& q_des, ContactRecord contacts,
                           const RobotModel& model, const Terrain& terrain,
                           const ContactParams& cfg, double dt);

/// World-frame foot position for one leg.
Vec3 foot_world_position(const TrunkState& trunk, const JointState& js,
                         const LegGeometry& geom, int leg_index);

/// Fall iff base height is strictly below 0.15 m above the support level.
enum class Termination { None, Fall };
Termination check_termination(const TrunkState& trunk);

} // namespace gaitlab
