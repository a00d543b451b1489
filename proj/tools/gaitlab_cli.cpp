// gaitlab experiment runner. Subcommands: run, train, sweep-rewards,
// sweep-observations, extended-gait, replay. Exit codes: 0 ok, 2 config or
// usage error, 3 runtime failure (divergence, I/O during a run).
#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gaitlab/config.hpp"
#include "gaitlab/metrics.hpp"
#include "gaitlab/toy_env.hpp"

namespace fs = std::filesystem;
using namespace gaitlab;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
}

double to_raw(double x, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return std::clamp(2.0 * (x - lo) / (hi - lo) - 1.0, -1.0, 1.0);
}

// Constant-drive fallback controller used when no policy checkpoint is given.
Eigen::VectorXd scripted_action(const Scenario& s, double mu, double omega) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(s.action.dim());
  const double raw_mu = to_raw(mu, s.action.mu_min, s.action.mu_max);
  double w_lo = s.action.omega_min;
  double w_hi = s.action.omega_max;
  if (s.kind == ScenarioKind::Flat) {
    w_lo = 0.0;
    w_hi = s.action.freq_bound(s.v_des);
  }
  const double raw_w = to_raw(omega, w_lo, w_hi);
  for (int i = 0; i < 4; ++i) {
    a[i] = raw_mu;
    a[4 + i] = raw_w;
  }
  return a;
}

Controller make_controller(const std::shared_ptr<const Policy>& policy,
                           const Scenario& s) {
  if (policy)
    return [policy](const Eigen::VectorXd& obs) {
      return policy->mean_action(obs);
    };
  const Eigen::VectorXd a = scripted_action(s, 1.5, 12.0);
  return [a](const Eigen::VectorXd&) { return a; };
}

// Materializes the scenario for one evaluation episode: desired velocity
// resampled from the configured range and, for gap courses, a fresh layout,
// both seeded so runs reproduce bit-exactly.
Scenario episode_scenario(const ScenarioConfig& cfg, uint64_t seed) {
  Scenario s = cfg.build_scenario();
  std::mt19937_64 rng(seed);
  if (cfg.v_des_range) {
    std::uniform_real_distribution<double> d(cfg.v_des_range->first,
                                             cfg.v_des_range->second);
    s.v_des = d(rng);
  }
  if (cfg.terrain.kind == TerrainKind::Gaps && cfg.randomize_terrain_per_reset)
    s.terrain = cfg.terrain.build(rng());
  return s;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct EvalResult {
  std::vector<EpisodeLog> logs;
  std::vector<MetricsReport> reports;
};

EvalResult evaluate(const ScenarioConfig& cfg,
                    const std::shared_ptr<const Policy>& policy, uint64_t seed,
                    int episodes, int parallel) {
  EvalResult out;
  out.logs.resize(episodes);
  out.reports.resize(episodes);
  parallel_for(episodes, parallel, [&](int i) {
    const Scenario s = episode_scenario(cfg, seed + i);
    out.logs[i] = run_episode(make_controller(policy, s), s, seed + i);
    out.reports[i] = compute_metrics(out.logs[i], s.model, s.terrain);
  });
  return out;
}

MetricsReport aggregate(const std::vector<MetricsReport>& reports) {
  MetricsReport a;
  if (reports.empty()) return a;
  for (const MetricsReport& r : reports) {
    a.cot += r.cot;
    a.cv_stride_duration += r.cv_stride_duration;
    a.cv_stride_length += r.cv_stride_length;
    a.mean_abs_angular_velocity += r.mean_abs_angular_velocity;
    a.mean_abs_lateral_dcm_offset += r.mean_abs_lateral_dcm_offset;
    a.mean_x_dcm_offset += r.mean_x_dcm_offset;
    a.peak_force = std::max(a.peak_force, r.peak_force);
    a.success_rate += r.success_rate;
    a.froude += r.froude;
    a.mean_velocity += r.mean_velocity;
  }
  const double n = static_cast<double>(reports.size());
  a.cot /= n;
  a.cv_stride_duration /= n;
  a.cv_stride_length /= n;
  a.mean_abs_angular_velocity /= n;
  a.mean_abs_lateral_dcm_offset /= n;
  a.mean_x_dcm_offset /= n;
  a.success_rate /= n;
  a.froude /= n;
  a.mean_velocity /= n;
  return a;
}

double mean_excess_force(const EpisodeLog& log, double f_max) {
  if (log.rows.empty()) return 0.0;
  double sum = 0.0;
  for (const LogRow& r : log.rows)
    for (int i = 0; i < 4; ++i)
      sum += std::max(0.0, r.contacts.normal_force[i] - f_max);
  return sum / static_cast<double>(log.rows.size());
}

std::vector<uint64_t> seed_list(uint64_t base, int n) {
  std::vector<uint64_t> s(n);
  for (int i = 0; i < n; ++i) s[i] = base + i;
  return s;
}

std::shared_ptr<const Policy> load_policy(const std::string& path) {
  return std::make_shared<Policy>(Policy::deserialize(read_text(path)));
}

// Trains on the configured scenario; budget <= 0 returns the untrained init.
Policy train_scenario(const ScenarioConfig& cfg, long budget, uint64_t seed,
                      const std::function<void(const TrainPoint&, const Policy&)>&
                          on_update = nullptr) {
  const Scenario probe = cfg.build_scenario();
  const int obs_dim = probe.obs.length();
  const int action_dim = probe.action.dim();
  if (budget <= 0) {
    std::mt19937_64 rng(seed);
    return Policy(obs_dim, action_dim, cfg.train.hidden, cfg.train.activation,
                  rng);
  }
  const EnvFactory factory = [&cfg](uint64_t s) -> std::unique_ptr<Env> {
    return std::make_unique<ScenarioEnv>(cfg, s);
  };
  const TrainResult res =
      train(factory, cfg.train.num_envs, budget, cfg.train.ppo,
            cfg.train.hidden, cfg.train.activation, obs_dim, action_dim, seed,
            on_update);
  return res.policy;
}

int cmd_run(const std::string& config_path, uint64_t seed,
            const std::string& out_dir, int parallel,
            const std::string& policy_path) {
  const std::string text = read_text(config_path);
  const ScenarioConfig cfg = parse_scenario_config(text);
  std::shared_ptr<const Policy> policy;
  if (!policy_path.empty()) policy = load_policy(policy_path);

  const EvalResult res = evaluate(cfg, policy, seed, cfg.episodes, parallel);
  fs::create_directories(out_dir);
  for (int i = 0; i < cfg.episodes; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "episode_%02d", i);
    write_episode_csv(res.logs[i],
                      (fs::path(out_dir) / (std::string(name) + ".csv")).string());
    write_text(fs::path(out_dir) / (std::string(name) + ".metrics.json"),
               res.reports[i].to_json() + "\n");
  }
  write_text(fs::path(out_dir) / "report.json",
             aggregate(res.reports).to_json() + "\n");
  write_manifest(out_dir, config_path, text, seed_list(seed, cfg.episodes));
  std::cout << "wrote " << cfg.episodes << " episodes to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, uint64_t seed,
              const std::string& out_dir, long budget, bool toy) {
  std::string config_text = "{}";
  ScenarioConfig cfg;
  if (!toy) {
    config_text = read_text(config_path);
    cfg = parse_scenario_config(config_text);
  }
  if (budget > 0) cfg.train.total_samples = budget;

  fs::create_directories(out_dir);
  std::ofstream curve((fs::path(out_dir) / "curve.csv").string());
  curve << "samples,mean_episode_return,mean_kl\n";
  int updates = 0;

  const auto on_update = [&](const TrainPoint& pt, const Policy& p) {
    curve << pt.samples << "," << pt.mean_episode_return << "," << pt.mean_kl
          << "\n";
    ++updates;
    if (cfg.train.checkpoint_every_updates > 0 &&
        updates % cfg.train.checkpoint_every_updates == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_%05d.json", updates);
      write_text(fs::path(out_dir) / name, p.serialize());
    }
  };

  Policy policy;
  if (toy) {
    const EnvFactory factory = [](uint64_t s) -> std::unique_ptr<Env> {
      return std::make_unique<ToyVelocityEnv>(s);
    };
    policy = train(factory, cfg.train.num_envs, cfg.train.total_samples,
                   cfg.train.ppo, cfg.train.hidden, cfg.train.activation,
                   ToyVelocityEnv::kObsDim, ToyVelocityEnv::kActionDim, seed,
                   on_update)
                 .policy;
  } else {
    policy = train_scenario(cfg, cfg.train.total_samples, seed, on_update);
  }
  write_text(fs::path(out_dir) / "policy.json", policy.serialize());
  write_manifest(out_dir, toy ? "<toy>" : config_path, config_text, {seed});
  std::cout << "trained " << cfg.train.total_samples << " samples, " << updates
            << " updates -> " << out_dir << "\n";
  return 0;
}

int cmd_sweep_rewards(const std::string& config_path, uint64_t seed,
                      const std::string& out_dir, int parallel, long budget) {
  const std::string text = read_text(config_path);
  const ScenarioConfig base = parse_scenario_config(text);
  if (base.kind != ScenarioKind::Gap)
    throw ConfigError("sweep-rewards requires a gap scenario config");
  if (budget < 0) budget = base.train.total_samples;

  const std::vector<WeightGridCell> grid = weight_grid();
  struct Row {
    WeightGridCell cell;
    double success = 0.0, cot = 0.0, excess = 0.0;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), parallel, [&](int i) {
    ScenarioConfig cfg = base;
    cfg.reward_preset = grid[i].label();
    const uint64_t cell_seed = seed + 1000 * (i + 1);
    const auto policy = std::make_shared<const Policy>(
        train_scenario(cfg, budget, cell_seed));
    const EvalResult res = evaluate(cfg, policy, cell_seed, cfg.episodes, 1);
    Row& r = rows[i];
    r.cell = grid[i];
    const MetricsReport agg = aggregate(res.reports);
    r.success = agg.success_rate;
    r.cot = agg.cot;
    for (const EpisodeLog& log : res.logs)
      r.excess += mean_excess_force(log, grid[i].weights.f_c_max);
    r.excess /= static_cast<double>(res.logs.size());
  });

  fs::create_directories(out_dir);
  std::ofstream f((fs::path(out_dir) / "rewards_sweep.csv").string());
  f << "case_index,viability,cot_level,force_level,success_rate,cot,"
       "excess_peak_force\n";
  for (const Row& r : rows)
    f << r.cell.case_index << "," << weight_level_name(r.cell.viability) << ","
      << weight_level_name(r.cell.cot) << ","
      << weight_level_name(r.cell.force) << "," << r.success << "," << r.cot
      << "," << r.excess << "\n";
  write_manifest(out_dir, config_path, text, {seed});
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "\n";
  return 0;
}

int cmd_sweep_observations(const std::string& config_path, uint64_t seed,
                           const std::string& out_dir, int parallel,
                           long budget) {
  const std::string text = read_text(config_path);
  const ScenarioConfig base = parse_scenario_config(text);
  if (base.kind != ScenarioKind::Gap)
    throw ConfigError("sweep-observations requires a gap scenario config");
  if (budget < 0) budget = base.train.total_samples;

  const auto& presets = observation_presets(base.build_scenario().action.dim());
  struct Row {
    std::string name;
    MetricsReport agg;
  };
  std::vector<Row> rows(presets.size());
  parallel_for(static_cast<int>(presets.size()), parallel, [&](int i) {
    ScenarioConfig cfg = base;
    cfg.observation_preset = presets[i].name;
    const uint64_t case_seed = seed + 1000 * (i + 1);
    const auto policy = std::make_shared<const Policy>(
        train_scenario(cfg, budget, case_seed));
    const EvalResult res = evaluate(cfg, policy, case_seed, cfg.episodes, 1);
    rows[i] = {presets[i].name, aggregate(res.reports)};
  });

  fs::create_directories(out_dir);
  std::ofstream f((fs::path(out_dir) / "observations_sweep.csv").string());
  f << "case,success_rate,mean_abs_angular_velocity,cv_stride_duration,"
       "cv_stride_length,cot,mean_abs_lateral_dcm_offset\n";
  for (const Row& r : rows)
    f << r.name << "," << r.agg.success_rate << ","
      << r.agg.mean_abs_angular_velocity << "," << r.agg.cv_stride_duration
      << "," << r.agg.cv_stride_length << "," << r.agg.cot << ","
      << r.agg.mean_abs_lateral_dcm_offset << "\n";
  write_manifest(out_dir, config_path, text, {seed});
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "\n";
  return 0;
}

int cmd_extended_gait(const std::string& config_path, uint64_t seed,
                      const std::string& out_dir, int parallel,
                      const std::string& policy_path,
                      const std::vector<double>& scales) {
  const std::string text = read_text(config_path);
  const ScenarioConfig cfg = parse_scenario_config(text);
  const auto policy = load_policy(policy_path);

  struct Row {
    double scale = 0.0, v = 0.0, cot = 0.0;
    bool viable = false;
  };
  std::vector<Row> rows(scales.size());
  parallel_for(static_cast<int>(scales.size()), parallel, [&](int i) {
    Row& r = rows[i];
    r.scale = scales[i];
    if (scales[i] <= 0.0) return; // degenerate stride, excluded
    ScenarioConfig c = cfg;
    c.l_step_scale = scales[i];
    const EvalResult res = evaluate(c, policy, seed, c.episodes, 1);
    bool fell = false;
    for (const EpisodeLog& log : res.logs) fell = fell || log.terminated;
    const MetricsReport agg = aggregate(res.reports);
    r.v = agg.mean_velocity;
    r.cot = agg.cot;
    r.viable = !fell && agg.mean_velocity > 0.0 && agg.cot > 0.0;
  });

  fs::create_directories(out_dir);
  std::ofstream f((fs::path(out_dir) / "extended_gait.csv").string());
  f << "l_step_scale,mean_velocity,cot,viable\n";
  for (const Row& r : rows)
    f << r.scale << "," << r.v << "," << r.cot << "," << (r.viable ? 1 : 0)
      << "\n";
  write_manifest(out_dir, config_path, text, {seed});
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "\n";
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& config_path,
               uint64_t seed, const std::string& out_dir) {
  EpisodeLog log;
  try {
    log = read_episode_csv(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  RobotModel model;
  Terrain terrain = make_flat_terrain();
  if (!config_path.empty()) {
    const ScenarioConfig cfg = parse_scenario_config(read_text(config_path));
    const Scenario s = episode_scenario(cfg, seed);
    model = s.model;
    terrain = s.terrain;
  }
  const MetricsReport rep = compute_metrics(log, model, terrain);
  std::cout << rep.to_json() << "\n";
  if (!out_dir.empty())
    write_text(fs::path(out_dir) / "replay_report.json", rep.to_json() + "\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitlab: CPG-driven quadruped locomotion experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", policy_path, log_path;
  uint64_t seed = 1;
  int parallel = 1;
  long budget = -1;
  std::vector<double> scales = {0.6, 0.8, 1.0, 1.2, 1.4};

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "scenario config (JSON)");
    if (needs_config) c->required();
    sub->add_option("--seed", seed, "base RNG seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--parallel", parallel, "worker threads");
  };

  auto* run = app.add_subcommand("run", "evaluate episodes, write CSV logs");
  add_common(run, true);
  run->add_option("--policy", policy_path, "policy checkpoint (JSON)");

  auto* tr = app.add_subcommand("train", "PPO training on the scenario");
  add_common(tr, false);
  tr->add_option("--budget", budget, "total environment samples");
  bool toy = false;
  tr->add_flag("--toy", toy, "train on the built-in velocity toy env");

  auto* sr = app.add_subcommand("sweep-rewards", "27-cell reward-weight sweep");
  add_common(sr, true);
  sr->add_option("--budget", budget, "per-cell training samples (0 = untrained)");

  auto* so =
      app.add_subcommand("sweep-observations", "13-case observation sweep");
  add_common(so, true);
  so->add_option("--budget", budget, "per-case training samples (0 = untrained)");

  auto* eg = app.add_subcommand("extended-gait", "replay with stride overrides");
  add_common(eg, true);
  eg->add_option("--policy", policy_path, "policy checkpoint (JSON)")
      ->required();
  eg->add_option("--scales", scales, "stride-length scale factors");

  auto* rp = app.add_subcommand("replay", "recompute metrics from a log CSV");
  rp->add_option("--log", log_path, "episode CSV")->required();
  rp->add_option("--config", config_path, "scenario config for the terrain");
  rp->add_option("--seed", seed, "episode seed used when it was recorded");
  rp->add_option("--out", out_dir, "output directory");
  out_dir.clear(); // replay prints to stdout unless --out is given

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, seed, out_dir.empty() ? "out" : out_dir,
                     parallel, policy_path);
    if (tr->parsed())
      return cmd_train(config_path, seed, out_dir.empty() ? "out" : out_dir,
                       budget, toy);
    if (sr->parsed())
      return cmd_sweep_rewards(config_path, seed,
                               out_dir.empty() ? "out" : out_dir, parallel,
                               budget);
    if (so->parsed())
      return cmd_sweep_observations(config_path, seed,
                                    out_dir.empty() ? "out" : out_dir, parallel,
                                    budget);
    if (eg->parsed())
      return cmd_extended_gait(config_path, seed,
                               out_dir.empty() ? "out" : out_dir, parallel,
                               policy_path, scales);
    if (rp->parsed()) return cmd_replay(log_path, config_path, seed, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
