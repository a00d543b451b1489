#include "gaitlab/config.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace gaitlab {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

Terrain TerrainConfig::build(uint64_t seed_override) const {
  if (kind == TerrainKind::Flat) return make_flat_terrain();
  return make_gap_terrain(count, min_width, max_width, beam_width, first_gap_x,
                          seed_override);
}

Scenario ScenarioConfig::build_scenario() const {
  Scenario s;
  s.kind = kind;
  s.terrain = terrain.build();
  s.horizon_s = horizon_s;
  s.coupling = gait;
  s.v_des = v_des;
  s.l_step_scale = l_step_scale;

  s.action.scenario = kind;
  if (kind == ScenarioKind::Flat) {
    s.action.freq_bound = freq_bound == "trotting" ? FrequencyBound::trotting()
                                                   : FrequencyBound::walking();
  }

  std::string preset_name = observation_preset;
  if (preset_name.empty() && kind == ScenarioKind::Gap)
    preset_name = "case-01-feet-dist";
  if (preset_name.empty()) {
    s.obs = ObservationConfig{};
    s.obs.action_dim = s.action.dim();
  } else {
    const ObservationPreset* p;
    try {
      p = &gaitlab::observation_preset(preset_name, s.action.dim());
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    s.obs = p->config;
    // Presets 11-13 carry a forced coupling.
    if (p->coupling != Gait::Uncoupled) s.coupling = p->coupling;
  }

  if (!reward_preset.empty() && reward_preset != "flat") {
    bool found = false;
    for (const WeightGridCell& cell : weight_grid()) {
      if (cell.label() == reward_preset) {
        s.reward_gap_w = cell.weights;
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown reward preset: " + reward_preset);
  }
  return s;
}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  reject_unknown(j, {"scenario", "terrain", "gait", "observation_preset",
                     "reward_preset", "horizon_s", "v_des", "v_des_range",
                     "freq_bound", "l_step_scale", "episodes",
                     "randomize_terrain_per_reset", "train"},
                 "config root");

  if (j.contains("scenario")) {
    const std::string s = j.at("scenario");
    if (s == "flat") cfg.kind = ScenarioKind::Flat;
    else if (s == "gap") cfg.kind = ScenarioKind::Gap;
    else throw ConfigError("scenario must be 'flat' or 'gap', got '" + s + "'");
  }
  if (j.contains("terrain")) {
    const json& t = j.at("terrain");
    reject_unknown(t, {"kind", "count", "min_width", "max_width", "beam_width",
                       "first_gap_x", "seed"},
                   "terrain");
    const std::string k = t.value("kind", "flat");
    if (k == "flat") cfg.terrain.kind = TerrainKind::Flat;
    else if (k == "gaps") cfg.terrain.kind = TerrainKind::Gaps;
    else throw ConfigError("terrain.kind must be 'flat' or 'gaps'");
    get_if(t, "count", cfg.terrain.count);
    get_if(t, "min_width", cfg.terrain.min_width);
    get_if(t, "max_width", cfg.terrain.max_width);
    get_if(t, "beam_width", cfg.terrain.beam_width);
    get_if(t, "first_gap_x", cfg.terrain.first_gap_x);
    get_if(t, "seed", cfg.terrain.seed);
  } else if (cfg.kind == ScenarioKind::Gap) {
    cfg.terrain.kind = TerrainKind::Gaps;
  }
  if (cfg.kind == ScenarioKind::Gap && cfg.terrain.kind != TerrainKind::Gaps)
    throw ConfigError("gap scenario requires a gaps terrain");

  if (j.contains("gait")) {
    try {
      cfg.gait = gait_from_name(j.at("gait").get<std::string>());
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  } else if (cfg.kind == ScenarioKind::Gap) {
    cfg.gait = Gait::Uncoupled;
  }

  get_if(j, "observation_preset", cfg.observation_preset);
  get_if(j, "reward_preset", cfg.reward_preset);
  get_if(j, "horizon_s", cfg.horizon_s);
  get_if(j, "v_des", cfg.v_des);
  if (j.contains("v_des_range")) {
    const std::vector<double> r = j.at("v_des_range");
    if (r.size() != 2 || r[0] > r[1])
      throw ConfigError("v_des_range must be [lo, hi] with lo <= hi");
    cfg.v_des_range = {r[0], r[1]};
    cfg.v_des = 0.5 * (r[0] + r[1]);
  }
  get_if(j, "freq_bound", cfg.freq_bound);
  if (cfg.freq_bound != "walking" && cfg.freq_bound != "trotting")
    throw ConfigError("freq_bound must be 'walking' or 'trotting'");
  get_if(j, "l_step_scale", cfg.l_step_scale);
  get_if(j, "episodes", cfg.episodes);
  get_if(j, "randomize_terrain_per_reset", cfg.randomize_terrain_per_reset);
  if (cfg.horizon_s <= 0.0) throw ConfigError("horizon_s must be > 0");
  if (cfg.episodes <= 0) throw ConfigError("episodes must be > 0");

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"total_samples", "num_envs", "hidden", "activation",
                       "batch_size", "minibatch_size", "epochs", "clip",
                       "entropy_coef", "gamma", "gae_lambda", "desired_kl",
                       "learning_rate", "checkpoint_every_updates"},
                   "train");
    get_if(t, "total_samples", cfg.train.total_samples);
    get_if(t, "num_envs", cfg.train.num_envs);
    get_if(t, "hidden", cfg.train.hidden);
    if (t.contains("activation")) {
      const std::string a = t.at("activation");
      if (a == "tanh") cfg.train.activation = Activation::Tanh;
      else if (a == "elu") cfg.train.activation = Activation::Elu;
      else throw ConfigError("train.activation must be 'tanh' or 'elu'");
    }
    get_if(t, "batch_size", cfg.train.ppo.batch_size);
    get_if(t, "minibatch_size", cfg.train.ppo.minibatch_size);
    get_if(t, "epochs", cfg.train.ppo.epochs);
    get_if(t, "clip", cfg.train.ppo.clip);
    get_if(t, "entropy_coef", cfg.train.ppo.entropy_coef);
    get_if(t, "gamma", cfg.train.ppo.gamma);
    get_if(t, "gae_lambda", cfg.train.ppo.gae_lambda);
    get_if(t, "desired_kl", cfg.train.ppo.desired_kl);
    get_if(t, "learning_rate", cfg.train.ppo.learning_rate);
    get_if(t, "checkpoint_every_updates", cfg.train.checkpoint_every_updates);
    for (int h : cfg.train.hidden)
      if (h <= 0) throw ConfigError("train.hidden sizes must be positive");
    if (cfg.train.hidden.empty())
      throw ConfigError("train.hidden must not be empty");
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario_config(ss.str());
}

ScenarioEnv::ScenarioEnv(const ScenarioConfig& cfg, uint64_t seed)
    : cfg_(cfg), rng_(seed) {
  env_ = std::make_unique<QuadrupedEnv>(cfg.build_scenario(), seed);
  reset();
}

Eigen::VectorXd ScenarioEnv::reset() {
  if (cfg_.v_des_range) {
    std::uniform_real_distribution<double> d(cfg_.v_des_range->first,
                                             cfg_.v_des_range->second);
    env_->set_v_des(d(rng_));
  }
  if (cfg_.terrain.kind == TerrainKind::Gaps && cfg_.randomize_terrain_per_reset)
    env_->set_terrain(cfg_.terrain.build(rng_()));
  return env_->reset();
}

double ScenarioEnv::step(const Eigen::VectorXd& action) {
  return env_->step(action);
}

std::string content_hash(const std::string& text) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::string& out_dir, const std::string& config_path,
                    const std::string& config_text,
                    const std::vector<uint64_t>& seeds) {
  json j;
  j["version"] = "1.0";
  j["config_path"] = config_path;
  j["config_hash"] = content_hash(config_text);
  j["seeds"] = seeds;
  std::filesystem::create_directories(out_dir);
  std::ofstream f(std::filesystem::path(out_dir) / "manifest.json");
  f << j.dump(2) << "\n";
}

} // namespace gaitlab
