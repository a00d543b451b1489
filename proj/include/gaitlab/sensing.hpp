#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gaitlab/cpg.hpp"
#include "gaitlab/sim.hpp"
#include "gaitlab/terrain.hpp"

namespace gaitlab {

/// Feature mask for observation assembly. Feature order in the assembled
/// vector is fixed: orientation (roll/pitch/yaw), linear velocity, angular
/// velocity, joint positions, joint velocities, contact booleans, previous
/// action, CPG r / r_dot / theta / theta_dot, desired velocity, all-feet gap
/// distances, front-feet gap distances, hind-feet gap distances, base gap
/// distance, foot penetration booleans, ray scan, heightmap grid.
struct ObservationConfig {
  bool orientation = true;
  bool linear_velocity = true;
  bool angular_velocity = true;
  bool joint_positions = true;
  bool joint_velocities = true;
  bool contact_booleans = true;
  bool previous_action = true;
  bool cpg_states = true;       // r, r_dot, theta, theta_dot (16)
  bool desired_velocity = true;
  bool feet_gap_distances = false;       // 8
  bool front_feet_gap_distances = false; // 4
  bool hind_feet_gap_distances = false;  // 4
  bool base_gap_distance = false;        // 2
  bool foot_penetration = false;         // 4
  bool ray_scan = false;                 // ray_channels
  bool heightmap = false;                // heightmap_rows * heightmap_cols
  int action_dim = 12;
  int ray_channels = 3;
  int heightmap_rows = 10;
  int heightmap_cols = 6;
  double gap_distance_horizon = 1.0; // m
  double ray_max_range = 2.0;        // m
  double heightmap_spacing = 0.05;   // m

  int length() const;
  void validate() const; // throws InvalidInput on a zero-length config
};

/// The 13 observation/coupling presets of the gap-crossing ablation study.
/// Cases 11-13 reuse the case-01 feature set and differ only in the attached
/// gait coupling.
struct ObservationPreset {
  std::string name;
  ObservationConfig config;
  Gait coupling = Gait::Uncoupled;
};
const std::vector<ObservationPreset>& observation_presets(int action_dim = 12);
const ObservationPreset& observation_preset(const std::string& name,
                                            int action_dim = 12);

/// Per-foot horizontal distance (along x) to the start and end of the nearest
/// gap whose end lies ahead of the foot, clamped to [0, horizon]. Order:
/// (FL start, FL end, FR start, FR end, HL..., HR...). Flat terrain or no gap
/// in range saturates at the horizon.
Eigen::Matrix<double, 8, 1> feet_gap_distances(
    const std::array<Eigen::Vector2d, 4>& foot_xy, const Terrain& t,
    double horizon = 1.0);

/// Distance from one reference x to the next gap (start, end), same clamping.
Eigen::Vector2d gap_distance_from(double x, const Terrain& t, double horizon);

/// Analytic depth rays against the terrain profile. Rays start at `origin`
/// (world), are pitched down by `pitch_angles` from the horizontal in the
/// vertical plane of heading `yaw`, and return the distance to the first
/// terrain hit (support plane, gap floor, or gap end wall), capped at
/// max_range.
Eigen::VectorXd ray_scan(const Terrain& t, const Vec3& origin, double yaw,
                         const std::vector<double>& pitch_angles,
                         double max_range = 2.0);

/// Terrain heights on a base-yaw-aligned grid starting below the front hips,
/// row-major (rows advance along +x of the base).
Eigen::MatrixXd heightmap_query(const Terrain& t, const Vec3& base_p, double yaw,
                                int rows, int cols, double spacing);

/// Everything assemble_observation reads from the world.
struct ObservationInputs {
  Vec3 rpy = Vec3::Zero();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  Vec12 q = Vec12::Zero();
  Vec12 q_dot = Vec12::Zero();
  std::array<bool, 4> contacts = {false, false, false, false};
  Eigen::VectorXd prev_action;
  CpgState cpg;
  double v_des = 0.0;
  std::array<Eigen::Vector2d, 4> foot_xy = {
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  std::array<bool, 4> foot_in_gap = {false, false, false, false};
  Vec3 base_p = Vec3::Zero();
  double yaw = 0.0;
};

/// Fixed-order concatenation of the enabled features; theta entries are
/// wrapped to [0, 2*pi).
Eigen::VectorXd assemble_observation(const ObservationInputs& in,
                                     const Terrain& t,
                                     const ObservationConfig& cfg);

/// Roll/pitch/yaw (ZYX convention) of a body-to-world rotation.
Vec3 rotation_to_rpy(const Eigen::Quaterniond& q);

} // namespace gaitlab
