#include "gaitlab/sim.hpp"

#include <cmath>

namespace gaitlab {

Vec3 contact_force(const Vec3& foot_p, const Vec3& foot_v, ContactRecord& rec,
                   int leg_index, const Terrain& terrain, const ContactParams& cfg) {
  const double ground = terrain_height(terrain, foot_p.x(), foot_p.y());
  const double depth = ground - foot_p.z();
  if (depth <= 0.0) {
    rec.in_contact[leg_index] = false;
    rec.normal_force[leg_index] = 0.0;
    rec.anchor[leg_index].setZero();
    rec.tangential_force[leg_index].setZero();
    return Vec3::Zero();
  }

  const double fn = std::max(0.0, cfg.k_n * depth - cfg.d_n * foot_v.z());
  if (!rec.in_contact[leg_index]) {
    rec.anchor[leg_index] = foot_p.head<2>(); // touchdown
    rec.in_contact[leg_index] = true;
  }
  rec.normal_force[leg_index] = fn;

  Eigen::Vector2d ft = -cfg.k_t * (foot_p.head<2>() - rec.anchor[leg_index]) -
                       cfg.d_t * foot_v.head<2>();
  const double limit = cfg.mu * fn;
  const double mag = ft.norm();
  if (mag > limit) {
    ft *= limit / mag;
    // Slip: move the anchor so the spring demand equals the clamped force.
    rec.anchor[leg_index] =
        foot_p.head<2>() + (ft + cfg.d_t * foot_v.head<2>()) / cfg.k_t;
  }
  rec.tangential_force[leg_index] = ft;
  return Vec3(ft.x(), ft.y(), fn);
}

Vec3 foot_world_position(const TrunkState& trunk, const JointState& js,
                         const LegGeometry& geom, int leg_index) {
  const Vec3 q_leg = js.q.segment<3>(3 * leg_index);
  const Vec3 local = geom.hip_positions[leg_index] + leg_fk(q_leg, geom, leg_index);
  return trunk.p + trunk.R * local;
}

WorldStepResult step_world(const TrunkState& trunk, const JointState& js,
                           const Vec12& q_des, ContactRecord contacts,
                           const RobotModel& model, const Terrain& terrain,
                           const ContactParams& cfg, double dt) {
  const Vec12 tau = pd_torque(q_des, js, model.gains);

  Vec3 force_sum = Vec3::Zero();
  Vec3 torque_body = Vec3::Zero();
  Vec12 q_ddot;
  std::array<Vec3, 4> foot_world;

  const Eigen::Matrix3d Rm = trunk.R.toRotationMatrix();

  for (int leg = 0; leg < 4; ++leg) {
    const Vec3 q_leg = js.q.segment<3>(3 * leg);
    const Vec3 qd_leg = js.q_dot.segment<3>(3 * leg);
    const Eigen::Matrix3d J = leg_jacobian(q_leg, model.geom, leg);

    const Vec3 r_body = model.geom.hip_positions[leg] + leg_fk(q_leg, model.geom, leg);
    const Vec3 p_w = trunk.p + Rm * r_body;
    const Vec3 v_w = trunk.v + Rm * (trunk.w.cross(r_body) + J * qd_leg);
    foot_world[leg] = p_w;

    const Vec3 f_w = contact_force(p_w, v_w, contacts, leg, terrain, cfg);
    force_sum += f_w;
    torque_body += r_body.cross(Rm.transpose() * f_w);

    // Ground reaction reflected onto the joints through the foot Jacobian.
    const Vec3 tau_load = J.transpose() * (Rm.transpose() * f_w);
    q_ddot.segment<3>(3 * leg) =
        (tau.segment<3>(3 * leg) + tau_load) / model.joint_reflected_inertia;
  }

  WorldStepResult out;
  out.torques = tau;
  out.contacts = contacts;

  out.joints.q_dot = js.q_dot + dt * q_ddot;
  out.joints.q = js.q + dt * out.joints.q_dot;

  const Vec3 accel = Vec3(0.0, 0.0, -cfg.g) + force_sum / model.mass;
  out.trunk.v = trunk.v + dt * accel;
  out.trunk.p = trunk.p + dt * out.trunk.v;

  const Vec3 w_dot = model.inertia.ldlt().solve(
      torque_body - trunk.w.cross(model.inertia * trunk.w));
  out.trunk.w = trunk.w + dt * w_dot;

  const Vec3 dtheta = dt * out.trunk.w;
  const double angle = dtheta.norm();
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 0.0)
    dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, dtheta / angle));
  out.trunk.R = (trunk.R * dq).normalized();

  for (int leg = 0; leg < 4; ++leg)
    foot_world[leg] = foot_world_position(out.trunk, out.joints, model.geom, leg);
  out.foot_world = foot_world;

  if (!out.trunk.p.allFinite() || !out.trunk.v.allFinite() ||
      !out.trunk.w.allFinite() || !out.joints.q.allFinite() ||
      !out.joints.q_dot.allFinite())
    throw SimDiverged("simulation diverged: non-finite state");
  return out;
}

Termination check_termination(const TrunkState& trunk) {
  return trunk.p.z() < 0.15 ? Termination::Fall : Termination::None;
}

} // namespace gaitlab
