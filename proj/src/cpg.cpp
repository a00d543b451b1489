#include "gaitlab/cpg.hpp"

#include <cmath>

namespace gaitlab {

const char* gait_name(Gait g) {
  switch (g) {
    case Gait::Walk: return "walk";
    case Gait::Trot: return "trot";
    case Gait::Bound: return "bound";
    case Gait::Pronk: return "pronk";
    case Gait::Uncoupled: return "uncoupled";
  }
  return "?";
}

Gait gait_from_name(const std::string& name) {
  if (name == "walk") return Gait::Walk;
  if (name == "trot") return Gait::Trot;
  if (name == "bound") return Gait::Bound;
  if (name == "pronk") return Gait::Pronk;
  if (name == "uncoupled") return Gait::Uncoupled;
  throw InvalidInput("unknown gait: " + name);
}

double wrap_2pi(double x) {
  const double two_pi = 2.0 * M_PI;
  double y = std::fmod(x, two_pi);
  if (y < 0.0) y += two_pi;
  return y;
}

double wrap_pi(double x) {
  double y = wrap_2pi(x);
  if (y > M_PI) y -= 2.0 * M_PI;
  return y;
}

Eigen::Vector4d CpgState::theta_wrapped() const {
  Eigen::Vector4d out;
  for (int i = 0; i < 4; ++i) out[i] = wrap_2pi(theta[i]);
  return out;
}

namespace {

void require_finite(const Eigen::Vector4d& v, const char* field) {
  if (!v.allFinite()) throw InvalidInput(std::string("non-finite value in ") + field);
}

} // namespace

CpgState step_cpg(const CpgState& state, const CpgDrives& drives,
                  const CouplingSpec& coupling, const CpgParams& params) {
  require_finite(state.theta, "state.theta");
  require_finite(state.r, "state.r");
  require_finite(state.r_dot, "state.r_dot");
  require_finite(drives.mu, "drives.mu");
  require_finite(drives.omega, "drives.omega");
  if (!coupling.w.allFinite()) throw InvalidInput("non-finite value in coupling.w");
  if (!coupling.phi.allFinite()) throw InvalidInput("non-finite value in coupling.phi");
  if (!(params.alpha > 0.0)) throw InvalidInput("params.alpha must be > 0");
  if (!(params.dt > 0.0)) throw InvalidInput("params.dt must be > 0");

  const double a = params.alpha;
  const double dt = params.dt;

  CpgState next = state;
  for (int i = 0; i < 4; ++i) {
    double coupled = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (coupling.w(i, j) == 0.0) continue;
      coupled += state.r[j] * coupling.w(i, j) *
                 std::sin(state.theta[j] - state.theta[i] - coupling.phi(i, j));
    }
    next.theta_dot[i] = drives.omega[i] + coupled;

    const double r_ddot = a * (a / 4.0 * (drives.mu[i] - state.r[i]) - state.r_dot[i]);
    next.r_dot[i] = state.r_dot[i] + dt * r_ddot;
    next.r[i] = state.r[i] + dt * next.r_dot[i];
    next.theta[i] = state.theta[i] + dt * next.theta_dot[i];
  }
  return next;
}

Eigen::Vector3d gait_phase_offsets(Gait gait) {
  switch (gait) {
    case Gait::Walk: return {M_PI, 1.5 * M_PI, 0.5 * M_PI};
    case Gait::Trot: return {M_PI, M_PI, 0.0};
    case Gait::Bound: return {0.0, M_PI, M_PI};
    case Gait::Pronk:
    case Gait::Uncoupled: return {0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0};
}

CouplingSpec build_coupling(Gait gait) {
  CouplingSpec spec;
  if (gait != Gait::Uncoupled) {
    spec.w = Eigen::Matrix4d::Ones();
    spec.w.diagonal().setZero();
  }
  const Eigen::Vector3d abc = gait_phase_offsets(gait);
  // Offsets of each limb relative to FL; phi_ij = e_i - e_j.
  const Eigen::Vector4d e(0.0, abc[0], abc[1], abc[2]);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) spec.phi(i, j) = e[i] - e[j];
  return spec;
}

Eigen::Matrix<double, 6, 1> phase_differences(const CpgState& state) {
  static constexpr int pairs[6][2] = {{FL, FR}, {FL, HL}, {FL, HR},
                                      {FR, HL}, {FR, HR}, {HL, HR}};
  Eigen::Matrix<double, 6, 1> out;
  for (int k = 0; k < 6; ++k)
    out[k] = wrap_pi(state.theta[pairs[k][0]] - state.theta[pairs[k][1]]);
  return out;
}

} // namespace gaitlab
