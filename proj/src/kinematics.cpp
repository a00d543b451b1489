#include "gaitlab/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gaitlab {

Vec3 foot_target(double theta, double r, const FootTrajectoryParams& params,
                 const LegGeometry& geom, int leg_index) {
  const double s = std::sin(theta);
  const double x = params.x_off[leg_index] - params.l_step * r * std::cos(theta);
  const double z = s > 0.0 ? -params.h + params.l_clrnc * s
                           : -params.h + params.l_pntr * s;
  const double y = geom.lateral_sign[leg_index] * geom.l_hip;
  return {x, y, z};
}

Vec3 leg_fk(const Vec3& q_leg, const LegGeometry& geom, int leg_index) {
  const double s = geom.lateral_sign[leg_index];
  const double q1 = q_leg[0], q2 = q_leg[1], q3 = q_leg[2];
  // Pitch-plane chain (x forward, leg axis down).
  const double xp = -geom.l_thigh * std::sin(q2) - geom.l_calf * std::sin(q2 + q3);
  const double ell = geom.l_thigh * std::cos(q2) + geom.l_calf * std::cos(q2 + q3);
  // Roll about x applied to (y', z') = (s*l_hip, -ell).
  const double c1 = std::cos(q1), s1 = std::sin(q1);
  const double yp = s * geom.l_hip;
  return {xp, c1 * yp + s1 * ell, s1 * yp - c1 * ell};
}

Vec3 leg_ik(const Vec3& p, const LegGeometry& geom, int leg_index) {
  const double s = geom.lateral_sign[leg_index];
  const double lt = geom.l_thigh, lc = geom.l_calf;

  const double dyz2 = p.y() * p.y() + p.z() * p.z();
  const double lhip2 = geom.l_hip * geom.l_hip;
  if (dyz2 < lhip2) {
    std::ostringstream msg;
    msg << "target out of workspace: lateral distance " << std::sqrt(dyz2)
        << " m below hip link length " << geom.l_hip << " m";
    throw WorkspaceError(msg.str());
  }
  const double ell = std::sqrt(dyz2 - lhip2);
  const double rho = std::sqrt(p.x() * p.x() + ell * ell);

  constexpr double kEps = 1e-9;
  const double rho_max = lt + lc - kEps;
  const double rho_min = std::abs(lt - lc) + kEps;
  if (rho > rho_max || rho < rho_min) {
    std::ostringstream msg;
    msg << "target out of workspace: pitch-plane distance " << rho
        << " m outside [" << rho_min << ", " << rho_max << "] m";
    throw WorkspaceError(msg.str());
  }

  const double q1 = std::atan2(p.z(), p.y()) - std::atan2(-ell, s * geom.l_hip);

  double c3 = (rho * rho - lt * lt - lc * lc) / (2.0 * lt * lc);
  c3 = std::clamp(c3, -1.0, 1.0);
  const double q3 = -std::acos(c3); // knee-backward branch

  const double k1 = lt + lc * c3;
  const double k2 = lc * std::sin(q3);
  const double q2 = std::atan2(-p.x(), ell) - std::atan2(k2, k1);

  return {wrap_pi(q1), wrap_pi(q2), q3};
}

Eigen::Matrix3d leg_jacobian(const Vec3& q_leg, const LegGeometry& geom, int leg_index) {
  const double s = geom.lateral_sign[leg_index];
  const double q1 = q_leg[0], q2 = q_leg[1], q3 = q_leg[2];
  const double lt = geom.l_thigh, lc = geom.l_calf;
  const double c1 = std::cos(q1), s1 = std::sin(q1);
  const double c2 = std::cos(q2), s2 = std::sin(q2);
  const double c23 = std::cos(q2 + q3), s23 = std::sin(q2 + q3);

  const Vec3 p = leg_fk(q_leg, geom, leg_index);

  Eigen::Matrix3d J;
  // Column 1: rotation about the x axis.
  J.col(0) = Vec3(0.0, -p.z(), p.y());
  // Columns 2-3: pitch-plane derivatives rotated by the roll angle.
  const Vec3 d2_plane(-lt * c2 - lc * c23, 0.0, lt * s2 + lc * s23);
  const Vec3 d3_plane(-lc * c23, 0.0, lc * s23);
  auto roll = [&](const Vec3& v) {
    return Vec3(v.x(), c1 * v.y() - s1 * v.z(), s1 * v.y() + c1 * v.z());
  };
  J.col(1) = roll(d2_plane);
  J.col(2) = roll(d3_plane);
  (void)s;
  return J;
}

Vec3 clamp_to_workspace(const Vec3& p, const LegGeometry& geom,
                        [[maybe_unused]] int leg_index,
                        double eps) {
  // Targets from foot_target keep y = lateral_sign * l_hip, so the pitch-plane
  // leg extension is just |z| and the clamp stays in closed form.
  Vec3 out = p;
  const double rho_max = geom.l_thigh + geom.l_calf - eps;
  const double rho_min = std::abs(geom.l_thigh - geom.l_calf) + eps;
  Eigen::Vector2d u(p.x(), std::abs(p.z()));
  const double rho = u.norm();
  if (rho > rho_max) {
    u *= rho_max / rho;
  } else if (rho < rho_min) {
    u = rho > 0.0 ? Eigen::Vector2d(u * (rho_min / rho))
                  : Eigen::Vector2d(0.0, rho_min);
  } else {
    return out;
  }
  out.x() = u.x();
  out.z() = p.z() >= 0.0 ? u.y() : -u.y();
  return out;
}

Vec12 pd_torque(const Vec12& q_des, const JointState& js, const PdGains& gains) {
  Vec12 tau;
  for (int j = 0; j < 12; ++j) {
    const double t = gains.kp * (q_des[j] - js.q[j]) - gains.kd * js.q_dot[j];
    tau[j] = std::clamp(t, -gains.tau_max, gains.tau_max);
  }
  return tau;
}

} // namespace gaitlab
