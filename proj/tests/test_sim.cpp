#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitlab/episode.hpp"
#include "gaitlab/sim.hpp"

using namespace gaitlab;

namespace {

Terrain one_gap(double start, double width) {
  Terrain t;
  t.kind = TerrainKind::Gaps;
  t.gaps.push_back({start, width});
  return t;
}

// Standing state used by the equilibrium tests: trunk at nominal height minus
// static sag, joints from IK of straight-down stance targets.
struct Standing {
  TrunkState trunk;
  JointState joints;
  Vec12 q_des;
};

Standing make_standing(const RobotModel& model, const ContactParams& cfg,
                       double h = 0.25) {
  Standing s;
  const double sag = model.mass * cfg.g / (4.0 * cfg.k_n);
  s.trunk.p = Vec3(0.0, 0.0, h - sag);
  for (int leg = 0; leg < 4; ++leg) {
    const Vec3 target(0.0, model.geom.lateral_sign[leg] * model.geom.l_hip, -h);
    s.joints.q.segment<3>(3 * leg) = leg_ik(target, model.geom, leg);
  }
  s.q_des = s.joints.q;
  return s;
}

} // namespace

TEST_CASE("terrain_height") {
  CHECK(terrain_height(make_flat_terrain(), 3.7, -2.1) == 0.0);
  const Terrain t = one_gap(0.60, 0.16);
  CHECK(terrain_height(t, 0.70, 0.0) == doctest::Approx(-1.0));
  CHECK(terrain_height(t, 0.60, 0.0) == 0.0); // boundary is support
  CHECK(terrain_height(t, 0.76, 0.0) == 0.0);
  CHECK(terrain_height(t, 0.59, 5.0) == 0.0);
  CHECK(terrain_height(t, 0.70, 99.0) == doctest::Approx(-1.0)); // y-invariant
}

TEST_CASE("make_gap_terrain is seeded and respects the width range") {
  const Terrain a = make_gap_terrain(8, 0.14, 0.20, 0.14, 1.0, 42);
  const Terrain b = make_gap_terrain(8, 0.14, 0.20, 0.14, 1.0, 42);
  const Terrain c = make_gap_terrain(8, 0.14, 0.20, 0.14, 1.0, 43);
  REQUIRE(a.gaps.size() == 8);
  CHECK(a.gaps[0].start_x == doctest::Approx(1.0));
  bool differs = false;
  for (size_t i = 0; i < a.gaps.size(); ++i) {
    CHECK(a.gaps[i].width == b.gaps[i].width);
    CHECK(a.gaps[i].width >= 0.14);
    CHECK(a.gaps[i].width <= 0.20);
    if (i > 0)
      CHECK(a.gaps[i].start_x ==
            doctest::Approx(a.gaps[i - 1].end_x() + 0.14)); // beam spacing
    differs = differs || a.gaps[i].width != c.gaps[i].width;
  }
  CHECK(differs);
}

TEST_CASE("contact_force normal and friction model") {
  ContactParams cfg;
  const Terrain flat = make_flat_terrain();
  ContactRecord rec;

  SUBCASE("no force above ground") {
    const Vec3 f = contact_force(Vec3(0, 0, 0.1), Vec3::Zero(), rec, 0, flat, cfg);
    CHECK(f.isZero(0.0));
    CHECK_FALSE(rec.in_contact[0]);
    CHECK(rec.normal_force[0] == 0.0);
  }
  SUBCASE("static 1 mm penetration gives k_n * delta") {
    const Vec3 f =
        contact_force(Vec3(0, 0, -0.001), Vec3::Zero(), rec, 1, flat, cfg);
    CHECK(f.z() == doctest::Approx(10.0));
    CHECK(rec.in_contact[1]);
  }
  SUBCASE("tangential demand beyond the cone is clamped and the anchor slips") {
    // 5 mm penetration -> F_n = 50 N; anchor 20 mm behind -> demand 100 N.
    contact_force(Vec3(0, 0, -0.005), Vec3::Zero(), rec, 2, flat, cfg);
    rec.anchor[2] = Eigen::Vector2d(-0.02, 0.0);
    const Vec3 f =
        contact_force(Vec3(0, 0, -0.005), Vec3::Zero(), rec, 2, flat, cfg);
    CHECK(f.z() == doctest::Approx(50.0));
    CHECK(f.head<2>().norm() == doctest::Approx(0.8 * 50.0));
    // After the slip the spring demand at the new anchor equals the clamp.
    const Eigen::Vector2d demand = -cfg.k_t * (Eigen::Vector2d(0, 0) - rec.anchor[2]);
    CHECK(demand.norm() == doctest::Approx(40.0).epsilon(1e-9));
  }
  SUBCASE("cone property scan") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pz(-0.01, 0.005);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    ContactRecord r;
    for (int it = 0; it < 100000; ++it) {
      const int leg = it % 4;
      const Vec3 p(u(rng), u(rng), pz(rng));
      const Vec3 v(u(rng), u(rng), u(rng));
      const Vec3 f = contact_force(p, v, r, leg, flat, cfg);
      CHECK(f.z() >= 0.0);
      CHECK(f.head<2>().norm() <= cfg.mu * f.z() + 1e-9);
      CHECK(r.normal_force[leg] == f.z());
      if (!r.in_contact[leg]) CHECK(f.isZero(0.0));
    }
  }
}

TEST_CASE("ballistic flight matches the discrete closed form") {
  RobotModel model;
  ContactParams cfg;
  const Terrain flat = make_flat_terrain();
  TrunkState trunk;
  trunk.p = Vec3(0.0, 0.0, 5.0);
  JointState js; // zero q, q_des = q -> zero PD torque, feet well above ground
  const Vec12 q_des = js.q;
  const double dt = 1e-3;
  const int n = 500;
  ContactRecord rec;
  for (int k = 0; k < n; ++k) {
    const WorldStepResult res =
        step_world(trunk, js, q_des, rec, model, flat, cfg, dt);
    CHECK(res.torques.isZero(0.0));
    trunk = res.trunk;
    js = res.joints;
    rec = res.contacts;
  }
  // Semi-implicit Euler under constant gravity: dz = -g dt^2 n(n+1)/2.
  const double expected = -cfg.g * dt * dt * n * (n + 1) / 2.0;
  CHECK(std::abs(trunk.p.z() - 5.0 - expected) < 1e-6);
  CHECK(js.q.isZero(0.0));
}

TEST_CASE("free flight conserves energy to 0.1% over 1 s") {
  RobotModel model;
  ContactParams cfg;
  const Terrain flat = make_flat_terrain();
  TrunkState trunk;
  trunk.p = Vec3(0.0, 0.0, 10.0);
  trunk.v = Vec3(1.0, 0.5, 0.0);
  JointState js;
  const Vec12 q_des = js.q;
  ContactRecord rec;
  auto energy = [&](const TrunkState& s) {
    return 0.5 * model.mass * s.v.squaredNorm() + model.mass * cfg.g * s.p.z();
  };
  const double e0 = energy(trunk);
  for (int k = 0; k < 1000; ++k) {
    const WorldStepResult res =
        step_world(trunk, js, q_des, rec, model, flat, cfg, 1e-3);
    trunk = res.trunk;
    js = res.joints;
  }
  CHECK(std::abs(energy(trunk) - e0) / e0 < 1e-3);
}

TEST_CASE("axisymmetric torque-free rotation preserves |w|") {
  RobotModel model;
  model.inertia = Eigen::Vector3d(0.2, 0.2, 0.3).asDiagonal();
  ContactParams cfg;
  cfg.g = 0.0;
  const Terrain flat = make_flat_terrain();
  TrunkState trunk;
  trunk.p = Vec3(0.0, 0.0, 50.0);
  trunk.w = Vec3(1.0, 0.4, 2.0);
  JointState js;
  const Vec12 q_des = js.q;
  ContactRecord rec;
  const double n0 = trunk.w.norm();
  for (int k = 0; k < 1000; ++k)
    trunk = step_world(trunk, js, q_des, rec, model, flat, cfg, 1e-3).trunk;
  CHECK(std::abs(trunk.w.norm() - n0) / n0 < 1e-3);
  CHECK(std::abs(trunk.R.norm() - 1.0) < 1e-9);
}

TEST_CASE("standing robot settles to total normal force = m g within 2%") {
  RobotModel model;
  ContactParams cfg;
  const Terrain flat = make_flat_terrain();
  Standing s = make_standing(model, cfg);
  ContactRecord rec;
  TrunkState trunk = s.trunk;
  JointState js = s.joints;
  for (int k = 0; k < 3000; ++k) {
    const WorldStepResult res =
        step_world(trunk, js, s.q_des, rec, model, flat, cfg, 1e-3);
    trunk = res.trunk;
    js = res.joints;
    rec = res.contacts;
  }
  const double total = rec.normal_force.sum();
  CHECK(std::abs(total - model.mass * cfg.g) / (model.mass * cfg.g) < 0.02);
  CHECK(trunk.p.z() > 0.15);
  for (int leg = 0; leg < 4; ++leg) CHECK(rec.in_contact[leg]);
}

TEST_CASE("check_termination threshold") {
  TrunkState t;
  t.p.z() = 0.30;
  CHECK(check_termination(t) == Termination::None);
  t.p.z() = 0.14;
  CHECK(check_termination(t) == Termination::Fall);
  t.p.z() = 0.15; // strict inequality
  CHECK(check_termination(t) == Termination::None);
}

TEST_CASE("non-finite state raises SimDiverged") {
  RobotModel model;
  ContactParams cfg;
  const Terrain flat = make_flat_terrain();
  TrunkState trunk;
  trunk.p = Vec3(0.0, 0.0, 1.0);
  JointState js;
  js.q[0] = std::numeric_limits<double>::quiet_NaN();
  ContactRecord rec;
  CHECK_THROWS_AS(step_world(trunk, js, Vec12::Zero(), rec, model, flat, cfg, 1e-3),
                  SimDiverged);
}

TEST_CASE("foot_world_position composes trunk pose and leg FK") {
  RobotModel model;
  TrunkState trunk;
  trunk.p = Vec3(0.4, -0.2, 0.3);
  trunk.R = Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Vec3(0.2, 0.5, 0.8).normalized()));
  JointState js;
  js.q << 0.1, -0.4, -1.2, 0.0, 0.3, -0.8, -0.2, 0.1, -1.5, 0.05, -0.2, -0.6;
  for (int leg = 0; leg < 4; ++leg) {
    const Vec3 expect =
        trunk.p + trunk.R * (model.geom.hip_positions[leg] +
                             leg_fk(js.q.segment<3>(3 * leg), model.geom, leg));
    CHECK((foot_world_position(trunk, js, model.geom, leg) - expect).norm() <
          1e-12);
  }
}

TEST_CASE("friction cone holds at every sample of a scripted trot episode") {
  Scenario s;
  s.kind = ScenarioKind::Flat;
  s.terrain = make_flat_terrain();
  s.coupling = Gait::Trot;
  s.horizon_s = 3.0;
  s.obs.action_dim = s.action.dim();
  s.action.scenario = ScenarioKind::Flat;
  // Constant drives mu = 1.5, omega = 12 rad/s mapped back to raw units.
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(8);
  const double w_hi = s.action.freq_bound(s.v_des);
  for (int i = 0; i < 4; ++i) {
    raw[i] = 2.0 * (1.5 - 0.5) / 3.5 - 1.0;
    raw[4 + i] = 2.0 * 12.0 / w_hi - 1.0;
  }
  const EpisodeLog log =
      run_episode([&](const Eigen::VectorXd&) { return raw; }, s, 3);
  REQUIRE(!log.rows.empty());
  for (const LogRow& row : log.rows)
    for (int leg = 0; leg < 4; ++leg)
      CHECK(row.contacts.tangential_force[leg].norm() <=
            0.8 * row.contacts.normal_force[leg] + 1e-9);
}
