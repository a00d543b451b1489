#include "gaitlab/reward.hpp"

#include <cmath>

namespace gaitlab {

const char* weight_level_name(WeightLevel l) {
  switch (l) {
    case WeightLevel::Low: return "low";
    case WeightLevel::Medium: return "medium";
    case WeightLevel::High: return "high";
  }
  return "?";
}

namespace {

double power_term(const TransitionData& td) {
  return std::abs(td.tau.dot(td.q_dot_now - td.q_dot_prev));
}

} // namespace

RewardBreakdown reward_flat(const TransitionData& td, const RewardWeightsFlat& w) {
  RewardBreakdown out;
  const double verr = td.v_des - td.v_real;
  out.terms[0] = w.a1 * std::min(td.f_x, td.d_max);
  out.terms[1] = w.a2 * std::exp(-(verr * verr) / 0.25);
  out.terms[2] = w.a3 * power_term(td);
  out.terms[3] = w.a4 * td.orientation_error.norm();
  out.total = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  return out;
}

RewardBreakdown reward_gap(const TransitionData& td, const RewardWeightsGap& w) {
  RewardBreakdown out;
  double excess = 0.0;
  for (int i = 0; i < 4; ++i)
    excess += std::max(0.0, td.contact_forces[i] - w.f_c_max);
  out.terms[0] = w.a1 * std::min(td.f_x, td.d_max);
  out.terms[1] = w.a2 * excess;
  out.terms[2] = w.a3 * power_term(td);
  out.terms[3] = w.a4 * td.orientation_error.norm();
  out.total = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  return out;
}

std::string WeightGridCell::label() const {
  return std::string(weight_level_name(viability)) + "-" +
         weight_level_name(cot) + "-" + weight_level_name(force);
}

std::vector<WeightGridCell> weight_grid() {
  constexpr double viab[3] = {0.1, 4.0, 8.0};
  constexpr double force[3] = {-0.0001, -0.001, -0.01};
  constexpr double power[3] = {-0.00001, -0.0001, -0.001};
  constexpr WeightLevel levels[3] = {WeightLevel::Low, WeightLevel::Medium,
                                     WeightLevel::High};
  std::vector<WeightGridCell> grid;
  grid.reserve(27);
  for (int v = 0; v < 3; ++v) {
    for (int c = 0; c < 3; ++c) {
      for (int f = 0; f < 3; ++f) {
        WeightGridCell cell;
        cell.case_index = 9 * v + 3 * c + f + 1;
        cell.viability = levels[v];
        cell.cot = levels[c];
        cell.force = levels[f];
        cell.weights.a1 = viab[v];
        cell.weights.a2 = force[f];
        cell.weights.a3 = power[c];
        grid.push_back(cell);
      }
    }
  }
  return grid;
}

} // namespace gaitlab
