#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace gaitlab {

// Limb indexing used everywhere in this project.
enum Limb : int { FL = 0, FR = 1, HL = 2, HR = 3 };
constexpr int kNumLimbs = 4;

enum class Gait { Walk, Trot, Bound, Pronk, Uncoupled };

const char* gait_name(Gait g);
Gait gait_from_name(const std::string& name);

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Wrap to [0, 2*pi).
double wrap_2pi(double x);
// Wrap to (-pi, pi]; -pi maps to +pi.
double wrap_pi(double x);

/// Rhythm-generator state: one amplitude-controlled phase oscillator per limb.
/// Phases are stored unwrapped so finite-difference frequency estimates stay
/// well defined; use theta_wrapped() for [0, 2*pi) values.
struct CpgState {
  Eigen::Vector4d theta = Eigen::Vector4d::Zero();      // phase, rad (unwrapped)
  Eigen::Vector4d r = Eigen::Vector4d::Zero();          // amplitude
  Eigen::Vector4d r_dot = Eigen::Vector4d::Zero();      // amplitude rate, 1/s
  Eigen::Vector4d theta_dot = Eigen::Vector4d::Zero();  // last phase rate, rad/s

  Eigen::Vector4d theta_wrapped() const;
};

struct CpgDrives {
  Eigen::Vector4d mu = Eigen::Vector4d::Ones();    // intrinsic amplitude
  Eigen::Vector4d omega = Eigen::Vector4d::Zero(); // intrinsic frequency, rad/s
};

struct CpgParams {
  double alpha = 50.0; // amplitude convergence factor, 1/s
  double dt = 1e-3;    // integration step, s
};

/// Coupling strengths w and phase biases phi between the four oscillators.
/// Diagonal of phi is zero; built-in gait templates are antisymmetric mod 2*pi.
struct CouplingSpec {
  Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d phi = Eigen::Matrix4d::Zero();
};

/// Advance the oscillators one step by semi-implicit Euler:
///   theta_dot_i = omega_i + sum_j r_j w_ij sin(theta_j - theta_i - phi_ij)
///   r_ddot_i    = alpha * (alpha/4 * (mu_i - r_i) - r_dot_i)
/// Throws InvalidInput naming the offending field on non-finite input.
CpgState step_cpg(const CpgState& state, const CpgDrives& drives,
                  const CouplingSpec& coupling, const CpgParams& params);

/// Gait template coupling matrices. Off-diagonal strengths are 1 (0 for
/// Uncoupled). Phase offsets of FR/HL/HR relative to FL:
///   walk (pi, 3*pi/2, pi/2), trot (pi, pi, 0), bound (0, pi, pi),
///   pronk (0, 0, 0).
CouplingSpec build_coupling(Gait gait);

/// Phase offsets (A, B, C) = FR/HL/HR relative to FL for a gait template.
Eigen::Vector3d gait_phase_offsets(Gait gait);

/// theta_i - theta_j wrapped to (-pi, pi] for the 6 unordered limb pairs, in
/// order (FL,FR), (FL,HL), (FL,HR), (FR,HL), (FR,HR), (HL,HR).
Eigen::Matrix<double, 6, 1> phase_differences(const CpgState& state);

} // namespace gaitlab
