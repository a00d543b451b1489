#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitlab/metrics.hpp"

using namespace gaitlab;

namespace {

// Synthetic log builder: rows at control_dt with default state; callers edit
// rows afterwards.
EpisodeLog make_log(int n, double control_dt = 0.01) {
  EpisodeLog log;
  log.control_dt = control_dt;
  log.rows.resize(n);
  for (int i = 0; i < n; ++i) log.rows[i].t = i * control_dt;
  return log;
}

} // namespace

TEST_CASE("detect_strides on a square-wave contact signal") {
  // 2 Hz gait on leg 0: contact during [0, 0.25), airborne during [0.25, 0.5).
  EpisodeLog log = make_log(300);
  for (int i = 0; i < 300; ++i) {
    const double phase = std::fmod(log.rows[i].t, 0.5);
    log.rows[i].contacts.in_contact[0] = phase < 0.25;
    log.rows[i].foot_world[0] = Vec3(0.4 * log.rows[i].t, 0.0, 0.0);
  }
  const StrideEvents ev = detect_strides(log);
  // First touchdown at t=0 is suppressed (no prior lift-off); the rest land at
  // 0.5, 1.0, 1.5, 2.0, 2.5.
  REQUIRE(ev.touchdown_times[0].size() == 5);
  for (size_t k = 0; k < 5; ++k)
    CHECK(ev.touchdown_times[0][k] == doctest::Approx(0.5 * (k + 1)));
  const auto durations = ev.stride_durations();
  REQUIRE(durations.size() == 4);
  for (double d : durations) CHECK(d == doctest::Approx(0.5));
  const auto lengths = ev.stride_lengths();
  REQUIRE(lengths.size() == 4);
  for (double l : lengths) CHECK(l == doctest::Approx(0.2)); // 0.4 m/s * 0.5 s
  for (int leg = 1; leg < 4; ++leg) CHECK(ev.touchdown_times[leg].empty());
}

TEST_CASE("detect_strides debounces sub-threshold blips") {
  EpisodeLog log = make_log(100);
  // One sustained touchdown at t=0.30 after a 5 ms blip at t=0.10.
  for (int i = 10; i < 10 + 1; ++i) log.rows[i].contacts.in_contact[1] = true;
  for (int i = 30; i < 100; ++i) log.rows[i].contacts.in_contact[1] = true;
  const StrideEvents ev = detect_strides(log, 0.02); // 20 ms debounce
  REQUIRE(ev.touchdown_times[1].size() == 1);
  CHECK(ev.touchdown_times[1][0] == doctest::Approx(0.30));
}

TEST_CASE("coefficient_of_variation") {
  CHECK(coefficient_of_variation({1.0, 1.0, 1.0}) == 0.0);
  CHECK(coefficient_of_variation({1.0, 3.0}) == doctest::Approx(0.5));
  // Two-sample encodings of target CV values: mean 1, CV = half the spread.
  CHECK(coefficient_of_variation({0.62, 1.38}) == doctest::Approx(0.38));
  CHECK(coefficient_of_variation({0.69, 1.31}) == doctest::Approx(0.31));
  CHECK(coefficient_of_variation({0.56, 1.44}) == doctest::Approx(0.44));
  CHECK(coefficient_of_variation({0.65, 1.35}) == doctest::Approx(0.35));
  CHECK_THROWS_AS(coefficient_of_variation({1.0}), MetricsError);
  CHECK_THROWS_AS(coefficient_of_variation({-1.0, 1.0}), MetricsError);
}

TEST_CASE("cost_of_transport fixture") {
  // Constant |tau * q_dot| = 98.1 W at 1 m/s with a 12 kg body:
  // CoT = 98.1 / (12 * 9.81 * 1) = 0.8333...
  EpisodeLog log = make_log(101);
  for (LogRow& r : log.rows) {
    r.torques[0] = 98.1;
    r.joints.q_dot[0] = 1.0;
    r.trunk.p.x() = r.t; // 1 m/s
  }
  CHECK(cost_of_transport(log, 12.0) == doctest::Approx(98.1 / (12.0 * 9.81)));
  CHECK(cost_of_transport(log, 12.0) == doctest::Approx(0.83333).epsilon(1e-4));

  SUBCASE("errors") {
    EpisodeLog tiny = make_log(1);
    CHECK_THROWS_AS(cost_of_transport(tiny, 12.0), MetricsError);
    for (LogRow& r : log.rows) r.trunk.p.x() = -r.t; // walking backwards
    CHECK_THROWS_AS(cost_of_transport(log, 12.0), MetricsError);
  }
}

TEST_CASE("mean_abs_angular_velocity") {
  EpisodeLog log = make_log(1);
  log.rows[0].trunk.w = Vec3(1.0, -2.0, 3.0);
  CHECK(mean_abs_angular_velocity(log) == doctest::Approx(2.0));
  EpisodeLog empty;
  CHECK(mean_abs_angular_velocity(empty) == 0.0);
}

TEST_CASE("dcm and cop fixtures") {
  const double omega0 = std::sqrt(9.81 / 0.30);
  CHECK(omega0 == doctest::Approx(5.7184).epsilon(1e-4));
  const Eigen::Vector2d xi =
      dcm(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.3, 0.0), omega0);
  CHECK(xi.x() == doctest::Approx(0.05246).epsilon(1e-3));
  CHECK(xi.y() == 0.0);
  CHECK(dcm_offset(xi, Eigen::Vector2d(0.02, 0.01)).x() ==
        doctest::Approx(xi.x() - 0.02));

  ContactRecord rec;
  rec.normal_force << 10.0, 30.0, 0.0, 0.0;
  std::array<Eigen::Vector2d, 4> feet = {
      Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0),
      Eigen::Vector2d(5.0, 5.0), Eigen::Vector2d(-5.0, -5.0)};
  const Eigen::Vector2d cop = cop_estimate(rec, feet);
  CHECK(cop.x() == doctest::Approx(0.75));
  CHECK(cop.y() == 0.0);

  ContactRecord airborne;
  CHECK_THROWS_AS(cop_estimate(airborne, feet), MetricsError);
}

TEST_CASE("lipm_closed_form matches an RK4 integration of the LIPM") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const double omega0 = std::sqrt(9.81 / 0.30);
  for (int trial = 0; trial < 100; ++trial) {
    const double x0 = u(rng), v0 = u(rng), cop = 0.25 * u(rng);
    // x_ddot = omega0^2 (x - cop), integrated with RK4 at dt = 1e-4 for 1 s.
    double x = x0, v = v0;
    const double dt = 1e-4;
    auto acc = [&](double xs) { return omega0 * omega0 * (xs - cop); };
    for (int k = 0; k < 10000; ++k) {
      const double k1x = v, k1v = acc(x);
      const double k2x = v + 0.5 * dt * k1v, k2v = acc(x + 0.5 * dt * k1x);
      const double k3x = v + 0.5 * dt * k2v, k3v = acc(x + 0.5 * dt * k2x);
      const double k4x = v + dt * k3v, k4v = acc(x + dt * k3x);
      x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    const LipmState s = lipm_closed_form(x0, v0, cop, omega0, 1.0);
    CHECK(std::abs(s.x - x) < 1e-6 * std::max(1.0, std::abs(x)));
    CHECK(std::abs(s.xi - (x + v / omega0)) < 1e-6 * std::max(1.0, std::abs(s.xi)));
  }
  SUBCASE("t = 0 recovers the initial condition") {
    const LipmState s = lipm_closed_form(0.1, 0.2, 0.0, omega0, 0.0);
    CHECK(s.x == doctest::Approx(0.1));
    CHECK(s.xi == doctest::Approx(0.1 + 0.2 / omega0));
  }
}

TEST_CASE("froude number") {
  CHECK(froude(1.3, 0.30) == doctest::Approx(0.574).epsilon(1e-3));
  CHECK(froude(0.0, 0.25) == 0.0);
  CHECK_THROWS_AS(froude(1.0, 0.0), MetricsError);
  CHECK_THROWS_AS(froude(1.0, -0.1), MetricsError);
}

TEST_CASE("fit_quadratic") {
  SUBCASE("recovers an exact quadratic") {
    std::vector<std::pair<double, double>> pts;
    for (double v : {0.1, 0.4, 0.7, 1.0, 1.3})
      pts.push_back({v, 2.0 - 0.5 * v + 3.0 * v * v});
    const Eigen::Vector3d c = fit_quadratic(pts);
    CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(c[1] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(c[2] == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("matches the normal-equations solution on noisy data") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::pair<double, double>> pts;
    Eigen::MatrixXd A(20, 3);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
      const double v = 0.1 + 0.1 * i;
      const double c = 1.0 + v + v * v + 0.05 * u(rng);
      pts.push_back({v, c});
      A.row(i) << 1.0, v, v * v;
      y[i] = c;
    }
    const Eigen::Vector3d ref =
        (A.transpose() * A).ldlt().solve(A.transpose() * y);
    CHECK((fit_quadratic(pts) - ref).norm() < 1e-8);
  }
  SUBCASE("rank-deficient design throws") {
    CHECK_THROWS_AS(
        fit_quadratic({{0.5, 1.0}, {0.5, 1.1}, {0.5, 0.9}, {0.5, 1.0}}),
        MetricsError);
    CHECK_THROWS_AS(fit_quadratic({{0.1, 1.0}, {0.2, 1.1}}), MetricsError);
  }
}

TEST_CASE("eots") {
  SUBCASE("symmetric crossing at v = 1") {
    // walk cost 2 (constant); trot cost 3 - v. Equal at v = 1, trot cheaper
    // beyond it.
    const Eigen::Vector3d walk(2.0, 0.0, 0.0);
    const Eigen::Vector3d trot(3.0, -1.0, 0.0);
    CHECK(eots(walk, trot, {0.5, 1.5}) == doctest::Approx(1.0));
  }
  SUBCASE("quadratic pair picks the root with the correct slope sign") {
    // d(v) = (v - 1)(v - 2): roots at 1 (slope < 0) and 2 (slope > 0).
    const Eigen::Vector3d walk(2.0, -3.0, 1.0);
    const Eigen::Vector3d trot(0.0, 0.0, 0.0);
    CHECK(eots(walk, trot, {0.0, 3.0}) == doctest::Approx(2.0));
  }
  SUBCASE("errors") {
    const Eigen::Vector3d f(1.0, 2.0, 3.0);
    CHECK_THROWS_AS(eots(f, f, {0.0, 1.0}), MetricsError); // identical
    CHECK_THROWS_AS(eots(Eigen::Vector3d(2.0, 0.0, 0.0),
                         Eigen::Vector3d(1.0, 0.0, 0.0), {0.0, 1.0}),
                    MetricsError); // parallel, never intersect
    CHECK_THROWS_AS(eots(Eigen::Vector3d(2.0, 0.0, 0.0),
                         Eigen::Vector3d(3.0, -1.0, 0.0), {0.0, 0.5}),
                    MetricsError); // crossing outside the range
  }
}

TEST_CASE("MetricsReport JSON round trip") {
  MetricsReport r;
  r.cot = 1.25;
  r.cv_stride_duration = 0.38;
  r.cv_stride_length = 0.44;
  r.mean_abs_angular_velocity = 0.7;
  r.mean_abs_lateral_dcm_offset = 0.015;
  r.mean_x_dcm_offset = -0.002;
  r.peak_force = 212.5;
  r.success_rate = 0.75;
  r.froude = 0.574;
  r.mean_velocity = 1.3;
  const MetricsReport back = MetricsReport::from_json(r.to_json());
  CHECK(back.cot == r.cot);
  CHECK(back.cv_stride_duration == r.cv_stride_duration);
  CHECK(back.cv_stride_length == r.cv_stride_length);
  CHECK(back.mean_abs_angular_velocity == r.mean_abs_angular_velocity);
  CHECK(back.mean_abs_lateral_dcm_offset == r.mean_abs_lateral_dcm_offset);
  CHECK(back.mean_x_dcm_offset == r.mean_x_dcm_offset);
  CHECK(back.peak_force == r.peak_force);
  CHECK(back.success_rate == r.success_rate);
  CHECK(back.froude == r.froude);
  CHECK(back.mean_velocity == r.mean_velocity);
}

TEST_CASE("compute_metrics on a synthetic log") {
  EpisodeLog log = make_log(201);
  for (LogRow& r : log.rows) {
    r.trunk.p = Vec3(0.5 * r.t, 0.0, 0.25);
    r.trunk.v = Vec3(0.5, 0.0, 0.0);
    r.trunk.w = Vec3(0.3, 0.0, 0.0);
    r.torques[0] = 29.43; // 29.43 W at 0.5 m/s, 12 kg -> CoT = 0.5
    r.joints.q_dot[0] = 1.0;
    for (int leg = 0; leg < 4; ++leg) {
      r.contacts.in_contact[leg] = true;
      r.contacts.normal_force[leg] = 29.43; // mg/4
      r.foot_world[leg] = Vec3(0.5 * r.t, leg % 2 == 0 ? 0.13 : -0.13, 0.0);
    }
  }
  RobotModel model;
  const MetricsReport rep = compute_metrics(log, model, make_flat_terrain());
  CHECK(rep.mean_velocity == doctest::Approx(0.5));
  CHECK(rep.cot == doctest::Approx(29.43 / (12.0 * 9.81 * 0.5)));
  CHECK(rep.mean_abs_angular_velocity == doctest::Approx(0.1));
  CHECK(rep.peak_force == doctest::Approx(29.43));
  CHECK(rep.success_rate == 1.0); // flat terrain, no termination
  CHECK(rep.froude == doctest::Approx(froude(0.5, 0.25)));
  // Feet always in contact -> no whole strides -> CVs default to zero.
  CHECK(rep.cv_stride_duration == 0.0);
  CHECK(rep.cv_stride_length == 0.0);
  // The CoP sits under the trunk; the DCM leads it by v/omega0 in x only.
  const double omega0 = std::sqrt(9.81 / 0.25);
  CHECK(rep.mean_abs_lateral_dcm_offset == doctest::Approx(0.0));
  CHECK(rep.mean_x_dcm_offset == doctest::Approx(0.5 / omega0).epsilon(1e-6));

  SUBCASE("fallen flat episode scores zero success") {
    log.terminated = true;
    log.terminal_reason = "fall";
    CHECK(compute_metrics(log, model, make_flat_terrain()).success_rate == 0.0);
  }
  SUBCASE("gap terrain uses recorded crossing outcomes") {
    Terrain t;
    t.kind = TerrainKind::Gaps;
    t.gaps.push_back({5.0, 0.15});
    t.gaps.push_back({6.0, 0.15});
    log.gap_crossed = {true, false};
    CHECK(compute_metrics(log, model, t).success_rate == doctest::Approx(0.5));
  }
}
