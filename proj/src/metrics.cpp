#include "gaitlab/metrics.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace gaitlab {

using nlohmann::json;

std::vector<double> StrideEvents::stride_durations() const {
  std::vector<double> out;
  for (int leg = 0; leg < 4; ++leg) {
    const auto& t = touchdown_times[leg];
    for (size_t k = 1; k < t.size(); ++k) out.push_back(t[k] - t[k - 1]);
  }
  return out;
}

std::vector<double> StrideEvents::stride_lengths() const {
  std::vector<double> out;
  for (int leg = 0; leg < 4; ++leg) {
    const auto& x = touchdown_x[leg];
    for (size_t k = 1; k < x.size(); ++k) out.push_back(x[k] - x[k - 1]);
  }
  return out;
}

StrideEvents detect_strides(const EpisodeLog& log, double debounce_s) {
  StrideEvents ev;
  const int debounce_rows =
      std::max(1, static_cast<int>(std::round(debounce_s / log.control_dt)));
  for (int leg = 0; leg < 4; ++leg) {
    bool prev = true; // require a lift-off before the first touchdown counts
    for (size_t i = 0; i < log.rows.size(); ++i) {
      const bool now = log.rows[i].contacts.in_contact[leg];
      if (now && !prev) {
        // Sustained for debounce_rows samples?
        bool sustained = true;
        for (int k = 0; k < debounce_rows; ++k) {
          const size_t j = i + static_cast<size_t>(k);
          if (j >= log.rows.size() || !log.rows[j].contacts.in_contact[leg]) {
            sustained = false;
            break;
          }
        }
        if (sustained) {
          ev.touchdown_times[leg].push_back(log.rows[i].t);
          ev.touchdown_x[leg].push_back(log.rows[i].foot_world[leg].x());
        }
      }
      prev = now;
    }
  }
  return ev;
}

double coefficient_of_variation(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw MetricsError("CV undefined: need at least 2 samples, got " +
                       std::to_string(samples.size()));
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  if (mean == 0.0) throw MetricsError("CV undefined: zero mean");
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size()); // population variance
  return std::sqrt(var) / mean;
}

double cost_of_transport(const EpisodeLog& log, double mass, double g) {
  if (log.rows.size() < 2) throw MetricsError("CoT undefined: log too short");
  double power_sum = 0.0;
  for (const LogRow& r : log.rows)
    power_sum += r.torques.cwiseProduct(r.joints.q_dot).cwiseAbs().sum();
  const double mean_power = power_sum / static_cast<double>(log.rows.size());
  const double duration = log.rows.back().t - log.rows.front().t;
  const double v_mean =
      (log.rows.back().trunk.p.x() - log.rows.front().trunk.p.x()) / duration;
  if (v_mean <= 0.0)
    throw MetricsError("CoT undefined: non-positive mean forward velocity");
  return mean_power / (mass * g * v_mean);
}

double mean_abs_angular_velocity(const EpisodeLog& log) {
  if (log.rows.empty()) return 0.0;
  double sum = 0.0;
  for (const LogRow& r : log.rows) sum += r.trunk.w.cwiseAbs().sum();
  return sum / (3.0 * static_cast<double>(log.rows.size()));
}

Eigen::Vector2d dcm(const Eigen::Vector2d& r_com, const Eigen::Vector2d& v_com,
                    double omega0) {
  return r_com + v_com / omega0;
}

Eigen::Vector2d dcm_offset(const Eigen::Vector2d& xi, const Eigen::Vector2d& cop) {
  return xi - cop;
}

Eigen::Vector2d cop_estimate(const ContactRecord& contact,
                             const std::array<Eigen::Vector2d, 4>& foot_xy) {
  double total = 0.0;
  Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
  for (int i = 0; i < 4; ++i) {
    weighted += contact.normal_force[i] * foot_xy[i];
    total += contact.normal_force[i];
  }
  if (total <= 0.0) throw MetricsError("CoP undefined: no stance feet");
  return weighted / total;
}

LipmState lipm_closed_form(double x0, double v0, double cop, double omega0,
                           double t) {
  const double xi0 = x0 + v0 / omega0;
  const double xi = (xi0 - cop) * std::exp(omega0 * t) + cop;
  const double x = cop + (x0 - cop) * std::exp(-omega0 * t) +
                   (xi0 - cop) * std::sinh(omega0 * t);
  return {x, xi};
}

double froude(double v, double h, double g) {
  if (h <= 0.0) throw MetricsError("Froude undefined: h must be > 0");
  return v * v / (g * h);
}

Eigen::Vector3d fit_quadratic(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw MetricsError("quadratic fit needs at least 3 points");
  Eigen::MatrixXd A(points.size(), 3);
  Eigen::VectorXd y(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const double v = points[i].first;
    A(static_cast<int>(i), 0) = 1.0;
    A(static_cast<int>(i), 1) = v;
    A(static_cast<int>(i), 2) = v * v;
    y[static_cast<int>(i)] = points[i].second;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.rank() < 3)
    throw MetricsError("degenerate quadratic fit: rank-deficient design");
  return svd.solve(y);
}

double eots(const Eigen::Vector3d& fit_walk, const Eigen::Vector3d& fit_trot,
            std::pair<double, double> v_range) {
  // walk - trot difference quadratic d(v) = d0 + d1 v + d2 v^2; at the EOTS
  // trot becomes cheaper with increasing v, i.e. d'(v) > 0 at the root.
  const Eigen::Vector3d d = fit_walk - fit_trot;
  if (d.norm() < 1e-12) throw MetricsError("EOTS degenerate: identical fits");

  std::vector<double> roots;
  if (std::abs(d[2]) < 1e-12) {
    if (std::abs(d[1]) < 1e-12)
      throw MetricsError("EOTS: curves do not intersect");
    roots.push_back(-d[0] / d[1]);
  } else {
    const double disc = d[1] * d[1] - 4.0 * d[2] * d[0];
    if (disc < 0.0) throw MetricsError("EOTS: curves do not intersect");
    const double sq = std::sqrt(disc);
    roots.push_back((-d[1] - sq) / (2.0 * d[2]));
    roots.push_back((-d[1] + sq) / (2.0 * d[2]));
  }

  std::optional<double> best;
  for (double v : roots) {
    if (v < v_range.first || v > v_range.second) continue;
    const double slope = d[1] + 2.0 * d[2] * v;
    if (slope > 0.0 && (!best || v < *best)) best = v;
  }
  if (!best)
    throw MetricsError("EOTS: no intersection inside the velocity range");
  return *best;
}

MetricsReport compute_metrics(const EpisodeLog& log, const RobotModel& model,
                              const Terrain& terrain, double g) {
  MetricsReport rep;
  if (log.rows.empty()) return rep;

  const double duration = log.rows.back().t - log.rows.front().t;
  if (duration > 0.0)
    rep.mean_velocity =
        (log.rows.back().trunk.p.x() - log.rows.front().trunk.p.x()) / duration;

  try {
    rep.cot = cost_of_transport(log, model.mass, g);
  } catch (const MetricsError&) {
    rep.cot = 0.0;
  }

  const StrideEvents ev = detect_strides(log);
  try {
    rep.cv_stride_duration = coefficient_of_variation(ev.stride_durations());
  } catch (const MetricsError&) {
  }
  try {
    rep.cv_stride_length = coefficient_of_variation(ev.stride_lengths());
  } catch (const MetricsError&) {
  }

  rep.mean_abs_angular_velocity = mean_abs_angular_velocity(log);
  rep.peak_force = 0.0;
  for (const LogRow& r : log.rows)
    rep.peak_force = std::max(rep.peak_force, r.contacts.normal_force.maxCoeff());

  // DCM offsets against the force-weighted CoP, with omega0 from the mean
  // base height over a trailing 0.5 s window.
  double sum_abs_by = 0.0, sum_bx = 0.0;
  int n_dcm = 0;
  const int window = std::max(1, static_cast<int>(0.5 / log.control_dt));
  std::vector<double> heights;
  heights.reserve(log.rows.size());
  for (const LogRow& r : log.rows) {
    heights.push_back(r.trunk.p.z());
    double h = 0.0;
    const int n = std::min<int>(window, static_cast<int>(heights.size()));
    for (int k = 0; k < n; ++k) h += heights[heights.size() - 1 - k];
    h /= n;
    if (h <= 0.0) continue;
    const double omega0 = std::sqrt(g / h);
    std::array<Eigen::Vector2d, 4> foot_xy;
    for (int i = 0; i < 4; ++i) foot_xy[i] = r.foot_world[i].head<2>();
    try {
      const Eigen::Vector2d cop = cop_estimate(r.contacts, foot_xy);
      const Eigen::Vector2d xi =
          dcm(r.trunk.p.head<2>(), r.trunk.v.head<2>(), omega0);
      const Eigen::Vector2d b = dcm_offset(xi, cop);
      sum_abs_by += std::abs(b.y());
      sum_bx += b.x();
      ++n_dcm;
    } catch (const MetricsError&) {
      // airborne sample, skipped
    }
  }
  if (n_dcm > 0) {
    rep.mean_abs_lateral_dcm_offset = sum_abs_by / n_dcm;
    rep.mean_x_dcm_offset = sum_bx / n_dcm;
  }

  if (terrain.kind == TerrainKind::Gaps && !terrain.gaps.empty()) {
    const auto outcomes = log.gap_crossed.empty() ? gap_outcomes(log, terrain)
                                                  : log.gap_crossed;
    int crossed = 0;
    for (bool b : outcomes) crossed += b ? 1 : 0;
    rep.success_rate = static_cast<double>(crossed) /
                       static_cast<double>(outcomes.size());
  } else {
    rep.success_rate = log.terminal_reason.empty() ? 1.0 : 0.0;
  }

  double mean_h = 0.0;
  for (double h : heights) mean_h += h;
  mean_h /= static_cast<double>(heights.size());
  if (mean_h > 0.0) rep.froude = froude(rep.mean_velocity, mean_h, g);
  return rep;
}

std::string MetricsReport::to_json() const {
  json j;
  j["cot"] = cot;
  j["cv_stride_duration"] = cv_stride_duration;
  j["cv_stride_length"] = cv_stride_length;
  j["mean_abs_angular_velocity"] = mean_abs_angular_velocity;
  j["mean_abs_lateral_dcm_offset"] = mean_abs_lateral_dcm_offset;
  j["mean_x_dcm_offset"] = mean_x_dcm_offset;
  j["peak_force"] = peak_force;
  j["success_rate"] = success_rate;
  j["froude"] = froude;
  j["mean_velocity"] = mean_velocity;
  return j.dump(2);
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  const json j = json::parse(text);
  MetricsReport r;
  r.cot = j.at("cot");
  r.cv_stride_duration = j.at("cv_stride_duration");
  r.cv_stride_length = j.at("cv_stride_length");
  r.mean_abs_angular_velocity = j.at("mean_abs_angular_velocity");
  r.mean_abs_lateral_dcm_offset = j.at("mean_abs_lateral_dcm_offset");
  r.mean_x_dcm_offset = j.at("mean_x_dcm_offset");
  r.peak_force = j.at("peak_force");
  r.success_rate = j.at("success_rate");
  r.froude = j.at("froude");
  r.mean_velocity = j.at("mean_velocity");
  return r;
}

} // namespace gaitlab
