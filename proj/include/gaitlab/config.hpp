#pragma once

#include <optional>
#include <random>
#include <string>

#include "gaitlab/episode.hpp"
#include "gaitlab/ppo.hpp"

namespace gaitlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TerrainConfig {
  TerrainKind kind = TerrainKind::Flat;
  int count = 4;
  double min_width = 0.14;
  double max_width = 0.20;
  double beam_width = 0.14;
  double first_gap_x = 1.0;
  uint64_t seed = 1;

  Terrain build(uint64_t seed_override) const;
  Terrain build() const { return build(seed); }
};

struct TrainConfig {
  long total_samples = 500000;
  int num_envs = 16;
  std::vector<int> hidden = {256, 256};
  Activation activation = Activation::Tanh;
  PpoConfig ppo;
  int checkpoint_every_updates = 10;
};

/// Experiment description parsed from a strict JSON config file (unknown keys
/// are rejected with field-level messages).
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Flat;
  TerrainConfig terrain;
  Gait gait = Gait::Trot;
  std::string observation_preset; // empty = scenario default
  std::string reward_preset;      // "flat" or gap "low-low-low".."high-high-high"
  double horizon_s = 10.0;
  double v_des = 0.5;
  std::optional<std::pair<double, double>> v_des_range;
  std::string freq_bound = "walking"; // walking | trotting (flat only)
  double l_step_scale = 1.0;
  int episodes = 7;
  bool randomize_terrain_per_reset = true;
  TrainConfig train;

  /// Materialize the runtime Scenario (terrain from the stored seed).
  Scenario build_scenario() const;
};

ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);

/// Env adapter used for training: resamples the desired velocity (flat) and
/// regenerates the gap layout (gap terrains) at each reset, seeded.
class ScenarioEnv : public Env {
 public:
  ScenarioEnv(const ScenarioConfig& cfg, uint64_t seed);
  Eigen::VectorXd reset() override;
  double step(const Eigen::VectorXd& action) override;
  const Eigen::VectorXd& observation() const override {
    return env_->observation();
  }
  bool done() const override { return env_->done(); }
  QuadrupedEnv& inner() { return *env_; }

 private:
  ScenarioConfig cfg_;
  std::unique_ptr<QuadrupedEnv> env_;
  std::mt19937_64 rng_;
};

/// FNV-1a hash of a config file's bytes, hex-encoded, for run manifests.
std::string content_hash(const std::string& text);

/// Write out_dir/manifest.json recording config path+hash, seeds, version.
void write_manifest(const std::string& out_dir, const std::string& config_path,
                    const std::string& config_text,
                    const std::vector<uint64_t>& seeds);

} // namespace gaitlab
