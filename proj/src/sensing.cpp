#include "gaitlab/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace gaitlab {

int ObservationConfig::length() const {
  int n = 0;
  if (orientation) n += 3;
  if (linear_velocity) n += 3;
  if (angular_velocity) n += 3;
  if (joint_positions) n += 12;
  if (joint_velocities) n += 12;
  if (contact_booleans) n += 4;
  if (previous_action) n += action_dim;
  if (cpg_states) n += 16;
  if (desired_velocity) n += 1;
  if (feet_gap_distances) n += 8;
  if (front_feet_gap_distances) n += 4;
  if (hind_feet_gap_distances) n += 4;
  if (base_gap_distance) n += 2;
  if (foot_penetration) n += 4;
  if (ray_scan) n += ray_channels;
  if (heightmap) n += heightmap_rows * heightmap_cols;
  return n;
}

void ObservationConfig::validate() const {
  if (length() <= 0) throw InvalidInput("observation config enables no features");
}

namespace {

std::vector<ObservationPreset> build_presets(int action_dim) {
  ObservationConfig blind;
  blind.action_dim = action_dim;

  auto with = [&](auto mod) {
    ObservationConfig c = blind;
    mod(c);
    return c;
  };

  const ObservationConfig case1 =
      with([](ObservationConfig& c) { c.feet_gap_distances = true; });

  std::vector<ObservationPreset> p;
  p.push_back({"case-01-feet-dist", case1, Gait::Uncoupled});
  p.push_back({"case-02-front-feet-dist",
               with([](ObservationConfig& c) { c.front_feet_gap_distances = true; }),
               Gait::Uncoupled});
  p.push_back({"case-03-lidar",
               with([](ObservationConfig& c) { c.ray_scan = true; }),
               Gait::Uncoupled});
  {
    ObservationConfig c = case1;
    c.contact_booleans = false;
    p.push_back({"case-04-no-contacts", c, Gait::Uncoupled});
  }
  {
    ObservationConfig c = case1;
    c.joint_positions = false;
    c.joint_velocities = false;
    p.push_back({"case-05-no-proprioception", c, Gait::Uncoupled});
  }
  p.push_back({"case-06-hind-feet-dist",
               with([](ObservationConfig& c) { c.hind_feet_gap_distances = true; }),
               Gait::Uncoupled});
  {
    ObservationConfig c = case1;
    c.orientation = false;
    c.linear_velocity = false;
    c.angular_velocity = false;
    p.push_back({"case-07-no-vestibular", c, Gait::Uncoupled});
  }
  p.push_back({"case-08-base-dist",
               with([](ObservationConfig& c) { c.base_gap_distance = true; }),
               Gait::Uncoupled});
  p.push_back({"case-09-penetration-only",
               with([](ObservationConfig& c) { c.foot_penetration = true; }),
               Gait::Uncoupled});
  p.push_back({"case-10-blind", blind, Gait::Uncoupled});
  p.push_back({"case-11-walk-coupling", case1, Gait::Walk});
  p.push_back({"case-12-trot-coupling", case1, Gait::Trot});
  p.push_back({"case-13-bound-coupling", case1, Gait::Bound});
  return p;
}

} // namespace

const std::vector<ObservationPreset>& observation_presets(int action_dim) {
  static const std::vector<ObservationPreset> p8 = build_presets(8);
  static const std::vector<ObservationPreset> p12 = build_presets(12);
  return action_dim == 8 ? p8 : p12;
}

const ObservationPreset& observation_preset(const std::string& name,
                                            int action_dim) {
  for (const auto& p : observation_presets(action_dim))
    if (p.name == name) return p;
  throw InvalidInput("unknown observation preset: " + name);
}

Eigen::Vector2d gap_distance_from(double x, const Terrain& t, double horizon) {
  if (t.kind == TerrainKind::Gaps) {
    for (const Gap& g : t.gaps) {
      if (g.end_x() > x) {
        return {std::clamp(g.start_x - x, 0.0, horizon),
                std::clamp(g.end_x() - x, 0.0, horizon)};
      }
    }
  }
  return {horizon, horizon};
}

Eigen::Matrix<double, 8, 1> feet_gap_distances(
    const std::array<Eigen::Vector2d, 4>& foot_xy, const Terrain& t,
    double horizon) {
  Eigen::Matrix<double, 8, 1> out;
  for (int leg = 0; leg < 4; ++leg)
    out.segment<2>(2 * leg) = gap_distance_from(foot_xy[leg].x(), t, horizon);
  return out;
}

Eigen::VectorXd ray_scan(const Terrain& t, const Vec3& origin, double yaw,
                         const std::vector<double>& pitch_angles,
                         double max_range) {
  Eigen::VectorXd out(static_cast<int>(pitch_angles.size()));
  const Eigen::Vector2d heading(std::cos(yaw), std::sin(yaw));
  for (size_t k = 0; k < pitch_angles.size(); ++k) {
    const double pitch = pitch_angles[k];
    const double dz = -std::sin(pitch);
    const double dh = std::cos(pitch); // horizontal component
    double dist = max_range;
    if (dz < 0.0) {
      // First crossing of the support plane.
      const double t0 = -origin.z() / dz;
      const Eigen::Vector2d hit0 = origin.head<2>() + t0 * dh * heading;
      if (terrain_height(t, hit0.x(), hit0.y()) == 0.0) {
        dist = t0;
      } else {
        // Inside a gap: either the floor or the far wall comes first.
        const Gap* gap = nullptr;
        for (const Gap& g : t.gaps)
          if (hit0.x() > g.start_x && hit0.x() < g.end_x()) gap = &g;
        const double t_floor = (t.gap_floor_z - origin.z()) / dz;
        const double x_floor = origin.x() + t_floor * dh * heading.x();
        if (gap && dh * heading.x() > 0.0 && x_floor > gap->end_x()) {
          dist = (gap->end_x() - origin.x()) / (dh * heading.x());
        } else {
          dist = t_floor;
        }
      }
    }
    out[static_cast<int>(k)] = std::min(dist, max_range);
  }
  return out;
}

Eigen::MatrixXd heightmap_query(const Terrain& t, const Vec3& base_p, double yaw,
                                int rows, int cols, double spacing) {
  Eigen::MatrixXd grid(rows, cols);
  const double c = std::cos(yaw), s = std::sin(yaw);
  // Grid begins just below the front hips and extends forward.
  const double x0 = 0.18;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double lx = x0 + i * spacing;
      const double ly = (j - (cols - 1) / 2.0) * spacing;
      const double wx = base_p.x() + c * lx - s * ly;
      const double wy = base_p.y() + s * lx + c * ly;
      grid(i, j) = terrain_height(t, wx, wy);
    }
  }
  return grid;
}

Vec3 rotation_to_rpy(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d R = q.toRotationMatrix();
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return {roll, pitch, yaw};
}

Eigen::VectorXd assemble_observation(const ObservationInputs& in,
                                     const Terrain& t,
                                     const ObservationConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd obs(cfg.length());
  int at = 0;
  auto put = [&](const auto& block) {
    obs.segment(at, block.size()) = block;
    at += static_cast<int>(block.size());
  };

  if (cfg.orientation) put(in.rpy);
  if (cfg.linear_velocity) put(in.lin_vel);
  if (cfg.angular_velocity) put(in.ang_vel);
  if (cfg.joint_positions) put(in.q);
  if (cfg.joint_velocities) put(in.q_dot);
  if (cfg.contact_booleans) {
    for (int i = 0; i < 4; ++i) obs[at++] = in.contacts[i] ? 1.0 : 0.0;
  }
  if (cfg.previous_action) {
    Eigen::VectorXd a = in.prev_action;
    if (a.size() != cfg.action_dim) a = Eigen::VectorXd::Zero(cfg.action_dim);
    put(a);
  }
  if (cfg.cpg_states) {
    put(in.cpg.r);
    put(in.cpg.r_dot);
    put(in.cpg.theta_wrapped());
    put(in.cpg.theta_dot);
  }
  if (cfg.desired_velocity) obs[at++] = in.v_des;
  if (cfg.feet_gap_distances)
    put(feet_gap_distances(in.foot_xy, t, cfg.gap_distance_horizon));
  if (cfg.front_feet_gap_distances) {
    put(gap_distance_from(in.foot_xy[FL].x(), t, cfg.gap_distance_horizon));
    put(gap_distance_from(in.foot_xy[FR].x(), t, cfg.gap_distance_horizon));
  }
  if (cfg.hind_feet_gap_distances) {
    put(gap_distance_from(in.foot_xy[HL].x(), t, cfg.gap_distance_horizon));
    put(gap_distance_from(in.foot_xy[HR].x(), t, cfg.gap_distance_horizon));
  }
  if (cfg.base_gap_distance)
    put(gap_distance_from(in.base_p.x(), t, cfg.gap_distance_horizon));
  if (cfg.foot_penetration) {
    for (int i = 0; i < 4; ++i) obs[at++] = in.foot_in_gap[i] ? 1.0 : 0.0;
  }
  if (cfg.ray_scan) {
    const Vec3 sensor = in.base_p + Vec3(0.18 * std::cos(in.yaw),
                                         0.18 * std::sin(in.yaw), 0.0);
    // Downward pitches spread evenly over [30, 60] degrees.
    std::vector<double> pitches(cfg.ray_channels);
    for (int k = 0; k < cfg.ray_channels; ++k)
      pitches[k] = cfg.ray_channels > 1
                       ? M_PI / 6.0 + k * (M_PI / 6.0) / (cfg.ray_channels - 1)
                       : M_PI / 4.0;
    put(ray_scan(t, sensor, in.yaw, pitches, cfg.ray_max_range));
  }
  if (cfg.heightmap) {
    const Eigen::MatrixXd grid =
        heightmap_query(t, in.base_p, in.yaw, cfg.heightmap_rows,
                        cfg.heightmap_cols, cfg.heightmap_spacing);
    for (int i = 0; i < grid.rows(); ++i)
      for (int j = 0; j < grid.cols(); ++j) obs[at++] = grid(i, j);
  }
  return obs;
}

} // namespace gaitlab
