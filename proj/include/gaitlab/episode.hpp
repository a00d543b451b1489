#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gaitlab/action.hpp"
#include "gaitlab/cpg.hpp"
#include "gaitlab/reward.hpp"
#include "gaitlab/sensing.hpp"
#include "gaitlab/sim.hpp"
#include "gaitlab/terrain.hpp"

namespace gaitlab {

/// Everything needed to run one episode. The control loop runs at 100 Hz over
/// a 1 kHz inner physics/oscillator loop.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Flat;
  Terrain terrain;
  double horizon_s = 10.0;
  ObservationConfig obs;
  ActionSpec action;
  Gait coupling = Gait::Trot;
  FootTrajectoryParams traj;
  RobotModel model;
  ContactParams contact;
  CpgParams cpg_params;
  RewardWeightsFlat reward_flat_w;
  RewardWeightsGap reward_gap_w;
  double v_des = 0.5;          // m/s
  double l_step_scale = 1.0;   // extended-gait override factor
  double control_dt = 0.01;    // s
  int inner_steps = 10;        // physics steps per control step
};

struct LogRow {
  double t = 0.0;
  TrunkState trunk;
  JointState joints;
  Vec12 torques = Vec12::Zero();
  ContactRecord contacts;
  CpgState cpg;
  Eigen::VectorXd action;
  RewardBreakdown reward;
  std::array<Vec3, 4> foot_world;
  bool action_clamped = false;
};

struct EpisodeLog {
  std::vector<LogRow> rows;
  double control_dt = 0.01;
  int action_dim = 0;
  bool terminated = false;
  std::string terminal_reason; // "fall", "diverged", or empty
  std::vector<bool> gap_crossed; // filled for gap terrains
};

using Controller = std::function<Eigen::VectorXd(const Eigen::VectorXd& obs)>;

/// Incremental environment used both by run_episode and by the PPO rollout
/// collector. Deterministic given (scenario, seed).
class QuadrupedEnv {
 public:
  QuadrupedEnv(Scenario scenario, uint64_t seed);

  Eigen::VectorXd reset();
  /// One 100 Hz control step. Returns the reward; done() reports termination.
  double step(const Eigen::VectorXd& raw_action);

  const Eigen::VectorXd& observation() const { return obs_; }
  /// Takes effect at the next reset().
  void set_v_des(double v) { scenario_.v_des = v; }
  void set_terrain(const Terrain& t) { scenario_.terrain = t; }
  void set_l_step_scale(double s) { scenario_.l_step_scale = s; }
  bool done() const { return done_; }
  const std::string& terminal_reason() const { return terminal_reason_; }
  const Scenario& scenario() const { return scenario_; }
  const TrunkState& trunk() const { return trunk_; }
  const LogRow& last_row() const { return last_row_; }
  double time() const { return t_; }
  int max_steps() const {
    return static_cast<int>(scenario_.horizon_s / scenario_.control_dt + 0.5);
  }

 private:
  Eigen::VectorXd observe();

  Scenario scenario_;
  uint64_t seed_;
  CouplingSpec coupling_;
  TrunkState trunk_;
  JointState joints_;
  ContactRecord contacts_;
  CpgState cpg_;
  Eigen::VectorXd prev_action_;
  Eigen::VectorXd obs_;
  Vec12 prev_q_dot_ = Vec12::Zero();
  LogRow last_row_;
  double t_ = 0.0;
  int steps_ = 0;
  bool done_ = false;
  std::string terminal_reason_;
};

/// Run a full episode with the given controller; logs one row per control
/// step. Identical (scenario, seed, controller) gives identical logs.
EpisodeLog run_episode(const Controller& controller, const Scenario& scenario,
                       uint64_t seed);

/// Per-gap crossing outcomes: a gap counts as crossed when the trunk passes
/// its end without a prior fall and no foot took support on the gap floor.
std::vector<bool> gap_outcomes(const EpisodeLog& log, const Terrain& terrain);

/// CSV serialization with a fixed, documented column order (see README).
void write_episode_csv(const EpisodeLog& log, const std::string& path);
EpisodeLog read_episode_csv(const std::string& path);

} // namespace gaitlab
