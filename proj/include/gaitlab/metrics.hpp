#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitlab/episode.hpp"

namespace gaitlab {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-limb touchdown events (whole strides only are derived from these).
struct StrideEvents {
  std::array<std::vector<double>, 4> touchdown_times;  // s
  std::array<std::vector<double>, 4> touchdown_x;      // m

  std::vector<double> stride_durations() const;
  std::vector<double> stride_lengths() const;
};

struct MetricsReport {
  double cot = 0.0;
  double cv_stride_duration = 0.0;
  double cv_stride_length = 0.0;
  double mean_abs_angular_velocity = 0.0; // rad/s
  double mean_abs_lateral_dcm_offset = 0.0; // m
  double mean_x_dcm_offset = 0.0;           // m
  double peak_force = 0.0;                  // N
  double success_rate = 0.0;
  double froude = 0.0;
  double mean_velocity = 0.0; // m/s

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
};

/// Touchdowns are false->true contact transitions sustained for at least
/// `debounce_s`; only whole strides (consecutive touchdown pairs per limb)
/// contribute durations/lengths.
StrideEvents detect_strides(const EpisodeLog& log, double debounce_s = 0.010);

/// Population standard deviation over mean. Throws MetricsError for n < 2 or
/// zero mean.
double coefficient_of_variation(const std::vector<double>& samples);

/// CoT = mean(sum_j |tau_j qd_j|) / (m g v_mean), v_mean from net forward
/// displacement. Throws MetricsError when v_mean <= 0.
double cost_of_transport(const EpisodeLog& log, double mass, double g = 9.81);

double mean_abs_angular_velocity(const EpisodeLog& log);

/// DCM: xi = r_com + v_com / omega0.
Eigen::Vector2d dcm(const Eigen::Vector2d& r_com, const Eigen::Vector2d& v_com,
                    double omega0);

Eigen::Vector2d dcm_offset(const Eigen::Vector2d& xi, const Eigen::Vector2d& cop);

/// Normal-force-weighted mean of stance foot positions. Throws MetricsError
/// when no foot carries load.
Eigen::Vector2d cop_estimate(const ContactRecord& contact,
                             const std::array<Eigen::Vector2d, 4>& foot_xy);

/// Closed-form LIPM solution with a constant CoP:
///   xi(t) = (xi0 - cop) exp(+w t) + cop
///   x(t)  = cop + (x0 - cop) exp(-w t) + (xi0 - cop) sinh(w t)
/// (equivalently x(t) = cop + (x0 - cop) cosh(w t) + (v0 / w) sinh(w t)).
struct LipmState {
  double x;
  double xi;
};
LipmState lipm_closed_form(double x0, double v0, double cop, double omega0,
                           double t);

double froude(double v, double h, double g = 9.81);

/// Least-squares quadratic fit, coefficients (c0, c1, c2) of
/// c0 + c1 v + c2 v^2. Throws MetricsError on a rank-deficient design.
Eigen::Vector3d fit_quadratic(const std::vector<std::pair<double, double>>& points);

/// Energetically optimal transition speed: the intersection of two CoT
/// quadratics inside v_range where the second fit becomes cheaper with
/// increasing speed. Throws MetricsError when no such intersection exists.
double eots(const Eigen::Vector3d& fit_walk, const Eigen::Vector3d& fit_trot,
            std::pair<double, double> v_range);

/// Full report from an episode log.
MetricsReport compute_metrics(const EpisodeLog& log, const RobotModel& model,
                              const Terrain& terrain, double g = 9.81);

} // namespace gaitlab
