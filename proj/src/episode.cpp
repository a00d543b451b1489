#include "gaitlab/episode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gaitlab {

ScaledAction action_to_drives(const Eigen::VectorXd& raw, const ActionSpec& spec,
                              double v_des) {
  if (raw.size() != spec.dim())
    throw InvalidInput("action dimension mismatch: expected " +
                       std::to_string(spec.dim()) + ", got " +
                       std::to_string(raw.size()));
  auto affine = [](double u, double lo, double hi) {
    u = std::clamp(u, -1.0, 1.0);
    return lo + (u + 1.0) * 0.5 * (hi - lo);
  };
  const double omega_hi = spec.scenario == ScenarioKind::Flat
                              ? spec.freq_bound(v_des)
                              : spec.omega_max;
  ScaledAction out;
  for (int i = 0; i < 4; ++i) {
    out.drives.mu[i] = affine(raw[i], spec.mu_min, spec.mu_max);
    out.drives.omega[i] = affine(raw[4 + i], spec.omega_min, omega_hi);
    if (spec.scenario == ScenarioKind::Gap)
      out.x_off[i] = affine(raw[8 + i], -spec.x_off_limit, spec.x_off_limit);
  }
  return out;
}

QuadrupedEnv::QuadrupedEnv(Scenario scenario, uint64_t seed)
    : scenario_(std::move(scenario)), seed_(seed) {
  coupling_ = build_coupling(scenario_.coupling);
  reset();
}

Eigen::VectorXd QuadrupedEnv::reset() {
  const Eigen::Vector3d abc = gait_phase_offsets(scenario_.coupling);
  cpg_ = CpgState{};
  // Start phase-locked on the gait template, all legs in stance-side phase.
  const Eigen::Vector4d e(0.0, abc[0], abc[1], abc[2]);
  for (int i = 0; i < 4; ++i) cpg_.theta[i] = wrap_2pi(M_PI - e[i]);
  cpg_.r.setOnes();

  trunk_ = TrunkState{};
  // Settle height: nominal leg length minus the static spring penetration.
  const double sag =
      scenario_.model.mass * scenario_.contact.g / (4.0 * scenario_.contact.k_n);
  trunk_.p = Vec3(0.0, 0.0, scenario_.traj.h - sag);

  FootTrajectoryParams traj = scenario_.traj;
  traj.l_step *= scenario_.l_step_scale;
  for (int leg = 0; leg < 4; ++leg) {
    Vec3 target = foot_target(cpg_.theta[leg], cpg_.r[leg], traj,
                              scenario_.model.geom, leg);
    target = clamp_to_workspace(target, scenario_.model.geom, leg);
    joints_.q.segment<3>(3 * leg) = leg_ik(target, scenario_.model.geom, leg);
  }
  joints_.q_dot.setZero();
  contacts_ = ContactRecord{};
  prev_action_ = Eigen::VectorXd::Zero(scenario_.action.dim());
  prev_q_dot_.setZero();
  t_ = 0.0;
  steps_ = 0;
  done_ = false;
  terminal_reason_.clear();
  last_row_ = LogRow{};
  obs_ = observe();
  return obs_;
}

Eigen::VectorXd QuadrupedEnv::observe() {
  ObservationInputs in;
  in.rpy = rotation_to_rpy(trunk_.R);
  const Eigen::Matrix3d Rt = trunk_.R.toRotationMatrix().transpose();
  in.lin_vel = Rt * trunk_.v;
  in.ang_vel = trunk_.w;
  in.q = joints_.q;
  in.q_dot = joints_.q_dot;
  in.contacts = contacts_.in_contact;
  in.prev_action = prev_action_;
  in.cpg = cpg_;
  in.v_des = scenario_.v_des;
  for (int leg = 0; leg < 4; ++leg) {
    const Vec3 fw = foot_world_position(trunk_, joints_, scenario_.model.geom, leg);
    in.foot_xy[leg] = fw.head<2>();
    in.foot_in_gap[leg] =
        terrain_height(scenario_.terrain, fw.x(), fw.y()) < 0.0 && fw.z() < 0.0;
  }
  in.base_p = trunk_.p;
  in.yaw = in.rpy.z();
  return assemble_observation(in, scenario_.terrain, scenario_.obs);
}

double QuadrupedEnv::step(const Eigen::VectorXd& raw_action) {
  if (done_) throw std::logic_error("step() called on finished episode");

  Eigen::VectorXd action = raw_action;
  bool clamped = false;
  for (int i = 0; i < action.size(); ++i) {
    if (action[i] < -1.0 || action[i] > 1.0) {
      action[i] = std::clamp(action[i], -1.0, 1.0);
      clamped = true;
    }
  }

  const ScaledAction scaled =
      action_to_drives(action, scenario_.action, scenario_.v_des);

  FootTrajectoryParams traj = scenario_.traj;
  traj.l_step *= scenario_.l_step_scale;
  if (scenario_.action.scenario == ScenarioKind::Gap)
    traj.x_off += scaled.x_off;

  const double x_before = trunk_.p.x();
  Vec12 torques = Vec12::Zero();

  const double inner_dt = scenario_.control_dt / scenario_.inner_steps;
  CpgParams cpg_params = scenario_.cpg_params;
  cpg_params.dt = inner_dt;

  try {
    for (int k = 0; k < scenario_.inner_steps; ++k) {
      cpg_ = step_cpg(cpg_, scaled.drives, coupling_, cpg_params);
      Vec12 q_des;
      for (int leg = 0; leg < 4; ++leg) {
        Vec3 target = foot_target(cpg_.theta[leg], cpg_.r[leg], traj,
                                  scenario_.model.geom, leg);
        target = clamp_to_workspace(target, scenario_.model.geom, leg);
        q_des.segment<3>(3 * leg) = leg_ik(target, scenario_.model.geom, leg);
      }
      WorldStepResult res =
          step_world(trunk_, joints_, q_des, contacts_, scenario_.model,
                     scenario_.terrain, scenario_.contact, inner_dt);
      trunk_ = res.trunk;
      joints_ = res.joints;
      contacts_ = res.contacts;
      torques = res.torques;
    }
  } catch (const SimDiverged&) {
    done_ = true;
    terminal_reason_ = "diverged";
  }

  t_ += scenario_.control_dt;
  ++steps_;

  TransitionData td;
  td.f_x = trunk_.p.x() - x_before;
  td.v_des = scenario_.v_des;
  td.v_real = td.f_x / scenario_.control_dt;
  td.tau = torques;
  td.q_dot_now = joints_.q_dot;
  td.q_dot_prev = prev_q_dot_;
  td.orientation_error = rotation_to_rpy(trunk_.R);
  td.contact_forces = contacts_.normal_force;
  const RewardBreakdown rb = scenario_.kind == ScenarioKind::Flat
                                 ? reward_flat(td, scenario_.reward_flat_w)
                                 : reward_gap(td, scenario_.reward_gap_w);

  last_row_.t = t_;
  last_row_.trunk = trunk_;
  last_row_.joints = joints_;
  last_row_.torques = torques;
  last_row_.contacts = contacts_;
  last_row_.cpg = cpg_;
  last_row_.action = action;
  last_row_.reward = rb;
  last_row_.action_clamped = clamped;
  for (int leg = 0; leg < 4; ++leg)
    last_row_.foot_world[leg] =
        foot_world_position(trunk_, joints_, scenario_.model.geom, leg);

  prev_q_dot_ = joints_.q_dot;
  prev_action_ = action;

  if (!done_) {
    if (check_termination(trunk_) == Termination::Fall) {
      done_ = true;
      terminal_reason_ = "fall";
    } else if (steps_ >= max_steps()) {
      done_ = true;
    }
  }
  if (!done_) obs_ = observe();
  return rb.total;
}

EpisodeLog run_episode(const Controller& controller, const Scenario& scenario,
                       uint64_t seed) {
  QuadrupedEnv env(scenario, seed);
  EpisodeLog log;
  log.control_dt = scenario.control_dt;
  log.action_dim = scenario.action.dim();
  while (!env.done()) {
    const Eigen::VectorXd action = controller(env.observation());
    env.step(action);
    log.rows.push_back(env.last_row());
  }
  log.terminated = !env.terminal_reason().empty();
  log.terminal_reason = env.terminal_reason();
  if (scenario.terrain.kind == TerrainKind::Gaps)
    log.gap_crossed = gap_outcomes(log, scenario.terrain);
  return log;
}

std::vector<bool> gap_outcomes(const EpisodeLog& log, const Terrain& terrain) {
  std::vector<bool> out;
  for (const Gap& gap : terrain.gaps) {
    bool passed = false;
    bool settled_in_gap = false;
    for (const LogRow& row : log.rows) {
      for (int leg = 0; leg < 4 && !settled_in_gap; ++leg) {
        const Vec3& f = row.foot_world[leg];
        if (row.contacts.in_contact[leg] && f.x() > gap.start_x &&
            f.x() < gap.end_x() && f.z() < terrain.gap_floor_z + 0.05)
          settled_in_gap = true;
      }
      if (row.trunk.p.x() >= gap.end_x()) {
        passed = true;
        break;
      }
    }
    out.push_back(passed && !settled_in_gap);
  }
  return out;
}

namespace {

std::vector<std::string> csv_header(int action_dim) {
  std::vector<std::string> h = {"time", "px", "py", "pz", "qw", "qx", "qy", "qz",
                                "vx", "vy", "vz", "wx", "wy", "wz"};
  for (int i = 0; i < 12; ++i) h.push_back("q" + std::to_string(i));
  for (int i = 0; i < 12; ++i) h.push_back("qd" + std::to_string(i));
  for (int i = 0; i < 12; ++i) h.push_back("tau" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("contact" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("fn" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("cpg_r" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("cpg_rd" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("cpg_th" + std::to_string(i));
  for (int i = 0; i < 4; ++i) h.push_back("cpg_thd" + std::to_string(i));
  for (int i = 0; i < action_dim; ++i) h.push_back("a" + std::to_string(i));
  h.insert(h.end(), {"reward", "rew_progress", "rew_track_force", "rew_power",
                     "rew_orientation"});
  for (int i = 0; i < 4; ++i) {
    h.push_back("foot" + std::to_string(i) + "_x");
    h.push_back("foot" + std::to_string(i) + "_y");
    h.push_back("foot" + std::to_string(i) + "_z");
  }
  h.push_back("action_clamped");
  h.push_back("terminated"); // 0 = ran out, 1 = fall, 2 = diverged
  return h;
}

void append(std::vector<double>& v, const Eigen::Ref<const Eigen::VectorXd>& x) {
  for (int i = 0; i < x.size(); ++i) v.push_back(x[i]);
}

std::vector<double> row_values(const LogRow& r) {
  std::vector<double> v;
  v.push_back(r.t);
  append(v, r.trunk.p);
  v.insert(v.end(), {r.trunk.R.w(), r.trunk.R.x(), r.trunk.R.y(), r.trunk.R.z()});
  append(v, r.trunk.v);
  append(v, r.trunk.w);
  append(v, r.joints.q);
  append(v, r.joints.q_dot);
  append(v, r.torques);
  for (int i = 0; i < 4; ++i) v.push_back(r.contacts.in_contact[i] ? 1.0 : 0.0);
  append(v, r.contacts.normal_force);
  append(v, r.cpg.r);
  append(v, r.cpg.r_dot);
  append(v, r.cpg.theta_wrapped());
  append(v, r.cpg.theta_dot);
  append(v, r.action);
  v.push_back(r.reward.total);
  for (double term : r.reward.terms) v.push_back(term);
  for (int i = 0; i < 4; ++i) append(v, r.foot_world[i]);
  v.push_back(r.action_clamped ? 1.0 : 0.0);
  return v;
}

} // namespace

void write_episode_csv(const EpisodeLog& log, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const auto header = csv_header(log.action_dim);
  for (size_t i = 0; i < header.size(); ++i)
    f << header[i] << (i + 1 < header.size() ? "," : "\n");
  const double term_code = log.terminal_reason.empty()          ? 0.0
                           : log.terminal_reason == "fall"      ? 1.0
                                                                : 2.0;
  char buf[32];
  for (const LogRow& r : log.rows) {
    auto vals = row_values(r);
    vals.push_back(term_code);
    for (size_t i = 0; i < vals.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
      f << buf << (i + 1 < vals.size() ? "," : "\n");
    }
  }
}

EpisodeLog read_episode_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path + ": line 1: missing header");

  std::map<std::string, int> col;
  {
    std::stringstream ss(line);
    std::string name;
    int idx = 0;
    while (std::getline(ss, name, ',')) col[name] = idx++;
  }
  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end())
      throw std::runtime_error(path + ": missing column " + name);
    return it->second;
  };

  int action_dim = 0;
  while (col.count("a" + std::to_string(action_dim))) ++action_dim;

  EpisodeLog log;
  log.action_dim = action_dim;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                 ": bad value '" + cell + "'");
      }
    }
    if (v.size() < col.size())
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": truncated row");
    LogRow r;
    r.t = v[need("time")];
    r.trunk.p = Vec3(v[need("px")], v[need("py")], v[need("pz")]);
    r.trunk.R = Eigen::Quaterniond(v[need("qw")], v[need("qx")], v[need("qy")],
                                   v[need("qz")]);
    r.trunk.v = Vec3(v[need("vx")], v[need("vy")], v[need("vz")]);
    r.trunk.w = Vec3(v[need("wx")], v[need("wy")], v[need("wz")]);
    for (int i = 0; i < 12; ++i) {
      r.joints.q[i] = v[need("q" + std::to_string(i))];
      r.joints.q_dot[i] = v[need("qd" + std::to_string(i))];
      r.torques[i] = v[need("tau" + std::to_string(i))];
    }
    for (int i = 0; i < 4; ++i) {
      r.contacts.in_contact[i] = v[need("contact" + std::to_string(i))] != 0.0;
      r.contacts.normal_force[i] = v[need("fn" + std::to_string(i))];
      r.cpg.r[i] = v[need("cpg_r" + std::to_string(i))];
      r.cpg.r_dot[i] = v[need("cpg_rd" + std::to_string(i))];
      r.cpg.theta[i] = v[need("cpg_th" + std::to_string(i))];
      r.cpg.theta_dot[i] = v[need("cpg_thd" + std::to_string(i))];
      r.foot_world[i] = Vec3(v[need("foot" + std::to_string(i) + "_x")],
                             v[need("foot" + std::to_string(i) + "_y")],
                             v[need("foot" + std::to_string(i) + "_z")]);
    }
    r.action = Eigen::VectorXd(action_dim);
    for (int i = 0; i < action_dim; ++i)
      r.action[i] = v[need("a" + std::to_string(i))];
    r.reward.total = v[need("reward")];
    r.reward.terms[0] = v[need("rew_progress")];
    r.reward.terms[1] = v[need("rew_track_force")];
    r.reward.terms[2] = v[need("rew_power")];
    r.reward.terms[3] = v[need("rew_orientation")];
    if (col.count("action_clamped"))
      r.action_clamped = v[col["action_clamped"]] != 0.0;
    if (col.count("terminated")) {
      const int code = static_cast<int>(v[col["terminated"]]);
      log.terminated = code != 0;
      log.terminal_reason = code == 0 ? "" : code == 1 ? "fall" : "diverged";
    }
    log.rows.push_back(std::move(r));
  }
  if (log.rows.size() >= 2)
    log.control_dt = log.rows[1].t - log.rows[0].t;
  return log;
}

} // namespace gaitlab
