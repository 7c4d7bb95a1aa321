#include "shaping/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "shaping/approx.hpp"
#include "shaping/envs.hpp"
#include "shaping/gridworld_rules.hpp"
#include "shaping/sas.hpp"

namespace shaping::harness {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where, std::vector<std::string>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      errors.push_back("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, std::vector<std::string>& errors) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    errors.push_back(std::string("field '") + key + "' has the wrong type");
  }
}

std::string join_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid experiment config:";
  for (const auto& e : errors) msg += "\n  - " + e;
  return msg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> errors;
  ExperimentConfig cfg;

  check_keys(root,
             {"version", "name", "env", "algorithm", "advice", "rates", "critic",
              "projection_bound", "gamma", "episodes", "seeds", "metrics_window"},
             "top level", errors);
  read_field(root, "version", cfg.version, errors);
  if (cfg.version != 1) errors.push_back("unsupported config version (expected 1)");
  read_field(root, "name", cfg.name, errors);

  if (root.contains("env") && root["env"].is_object()) {
    const json& env = root["env"];
    check_keys(env, {"kind", "jump_prob", "step_cap", "task", "n", "episode_len"}, "env",
               errors);
    read_field(env, "kind", cfg.env_kind, errors);
    read_field(env, "jump_prob", cfg.jump_prob, errors);
    read_field(env, "step_cap", cfg.step_cap, errors);
    read_field(env, "task", cfg.task, errors);
    read_field(env, "n", cfg.n, errors);
    read_field(env, "episode_len", cfg.episode_len, errors);
  } else {
    errors.push_back("missing env object");
  }

  read_field(root, "algorithm", cfg.algorithm, errors);

  if (root.contains("advice")) {
    const json& adv = root["advice"];
    check_keys(adv, {"variant", "mode", "u0", "u1", "delta", "P", "alpha", "beta", "M"},
               "advice", errors);
    read_field(adv, "variant", cfg.variant, errors);
    read_field(adv, "mode", cfg.mode, errors);
    read_field(adv, "u0", cfg.u0, errors);
    read_field(adv, "u1", cfg.u1, errors);
    read_field(adv, "delta", cfg.delta, errors);
    read_field(adv, "P", cfg.P, errors);
    read_field(adv, "alpha", cfg.alpha, errors);
    read_field(adv, "beta", cfg.beta, errors);
    read_field(adv, "M", cfg.M, errors);
  }

  if (root.contains("rates")) {
    const json& rates = root["rates"];
    check_keys(rates,
               {"actor", "critic", "schedule", "actor_decay_pow", "critic_decay_pow",
                "decay_tau", "adam"},
               "rates", errors);
    read_field(rates, "actor", cfg.actor_rate, errors);
    read_field(rates, "critic", cfg.critic_rate, errors);
    read_field(rates, "schedule", cfg.schedule, errors);
    read_field(rates, "actor_decay_pow", cfg.actor_decay_pow, errors);
    read_field(rates, "critic_decay_pow", cfg.critic_decay_pow, errors);
    read_field(rates, "decay_tau", cfg.decay_tau, errors);
    read_field(rates, "adam", cfg.adam, errors);
  }

  read_field(root, "critic", cfg.critic, errors);
  if (root.contains("projection_bound") && !root["projection_bound"].is_null()) {
    double b = 0.0;
    read_field(root, "projection_bound", b, errors);
    cfg.projection_bound = b;
  }
  read_field(root, "gamma", cfg.gamma, errors);
  read_field(root, "episodes", cfg.episodes, errors);
  read_field(root, "seeds", cfg.seeds, errors);
  read_field(root, "metrics_window", cfg.metrics_window, errors);

  // semantic checks, all reported together
  const bool env_known = cfg.env_kind == "gridworld" || cfg.env_kind == "mountaincar" ||
                         cfg.env_kind == "particle";
  if (!env_known) errors.push_back("env.kind must be gridworld, mountaincar, or particle");
  if (cfg.env_kind == "gridworld" && !(cfg.jump_prob >= 0.0 && cfg.jump_prob <= 1.0)) {
    errors.push_back("env.jump_prob must lie in [0, 1]");
  }
  if (cfg.env_kind == "particle") {
    if (cfg.task != "cn" && cfg.task != "pd" && cfg.task != "pp") {
      errors.push_back("env.task must be cn, pd, or pp");
    }
    if (cfg.n < 1) errors.push_back("env.n must be at least 1");
    if (cfg.episode_len < 1) errors.push_back("env.episode_len must be positive");
  }
  if (cfg.step_cap < 0) errors.push_back("env.step_cap must be non-negative");

  const bool algo_known = cfg.algorithm == "sas" || cfg.algorithm == "sam" ||
                          cfg.algorithm == "sparse" || cfg.algorithm == "ircr";
  if (!algo_known) errors.push_back("algorithm must be sas, sam, sparse, or ircr");
  if (cfg.algorithm == "sas" && cfg.env_kind == "particle") {
    errors.push_back("sas runs on single-agent environments; use sam for particle tasks");
  }
  if ((cfg.algorithm == "sparse" || cfg.algorithm == "ircr") && cfg.variant != "none") {
    errors.push_back("baseline algorithms take no advice (advice.variant must be none)");
  }

  if (cfg.variant != "none" && cfg.variant != "uniform" && cfg.variant != "nonuniform") {
    errors.push_back("advice.variant must be none, uniform, or nonuniform");
  }
  if (!cfg.mode.empty() && cfg.mode != "lookahead" && cfg.mode != "lookback") {
    errors.push_back("advice.mode must be lookahead or lookback");
  }
  if (cfg.env_kind == "gridworld" && cfg.variant != "none") {
    if (!(cfg.u1 > cfg.u0)) errors.push_back("gridworld advice requires u1 > u0");
    if (cfg.variant == "nonuniform" && !(cfg.delta > 0.0)) {
      errors.push_back("gridworld nonuniform advice requires delta > 0");
    }
  }
  if (cfg.env_kind == "mountaincar" && cfg.variant == "uniform" && !(cfg.P >= 1.2)) {
    errors.push_back("mountain-car uniform advice requires P >= 1.2");
  }

  if (!(cfg.actor_rate > 0.0)) errors.push_back("rates.actor must be positive");
  if (!(cfg.critic_rate > 0.0)) errors.push_back("rates.critic must be positive");
  if (cfg.schedule != "constant" && cfg.schedule != "decay") {
    errors.push_back("rates.schedule must be constant or decay");
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) errors.push_back("gamma must lie in [0, 1]");
  const std::string resolved_mode =
      !cfg.mode.empty() ? cfg.mode : (cfg.variant == "uniform" ? "lookahead" : "lookback");
  if (cfg.variant != "none" && resolved_mode == "lookback" && cfg.gamma == 0.0) {
    errors.push_back("look-back advice requires gamma > 0");
  }
  if (!cfg.critic.empty() && cfg.critic != "mlp" && cfg.critic != "linear") {
    errors.push_back("critic must be mlp or linear");
  }
  if (cfg.episodes < 1) errors.push_back("episodes must be at least 1");
  if (cfg.seeds.empty()) errors.push_back("at least one seed is required");
  if (cfg.metrics_window < 1) errors.push_back("metrics_window must be at least 1");

  if (!errors.empty()) throw std::invalid_argument(join_errors(errors));

  if (cfg.mode.empty() && cfg.variant != "none") cfg.mode = resolved_mode;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["version"] = cfg.version;
  root["name"] = cfg.name;
  root["env"] = {{"kind", cfg.env_kind}};
  if (cfg.env_kind == "gridworld") root["env"]["jump_prob"] = cfg.jump_prob;
  if (cfg.step_cap > 0) root["env"]["step_cap"] = cfg.step_cap;
  if (cfg.env_kind == "particle") {
    root["env"]["task"] = cfg.task;
    root["env"]["n"] = cfg.n;
    root["env"]["episode_len"] = cfg.episode_len;
  }
  root["algorithm"] = cfg.algorithm;
  json adv;
  adv["variant"] = cfg.variant;
  if (!cfg.mode.empty()) adv["mode"] = cfg.mode;
  if (cfg.env_kind == "gridworld") {
    adv["u0"] = cfg.u0;
    adv["u1"] = cfg.u1;
    adv["delta"] = cfg.delta;
  } else if (cfg.env_kind == "mountaincar") {
    adv["P"] = cfg.P;
  } else {
    adv["alpha"] = cfg.alpha;
    adv["beta"] = cfg.beta;
    adv["M"] = cfg.M;
  }
  root["advice"] = adv;
  root["rates"] = {{"actor", cfg.actor_rate},
                   {"critic", cfg.critic_rate},
                   {"schedule", cfg.schedule},
                   {"adam", cfg.adam}};
  if (cfg.schedule == "decay") {
    root["rates"]["actor_decay_pow"] = cfg.actor_decay_pow;
    root["rates"]["critic_decay_pow"] = cfg.critic_decay_pow;
    root["rates"]["decay_tau"] = cfg.decay_tau;
  }
  if (!cfg.critic.empty()) root["critic"] = cfg.critic;
  if (cfg.projection_bound) root["projection_bound"] = *cfg.projection_bound;
  root["gamma"] = cfg.gamma;
  root["episodes"] = cfg.episodes;
  root["seeds"] = cfg.seeds;
  root["metrics_window"] = cfg.metrics_window;
  return root.dump(2) + "\n";
}

namespace {

AdviceMode resolved_mode(const ExperimentConfig& cfg) {
  if (cfg.mode == "lookahead") return AdviceMode::LookAhead;
  if (cfg.mode == "lookback") return AdviceMode::LookBack;
  return cfg.variant == "uniform" ? AdviceMode::LookAhead : AdviceMode::LookBack;
}

std::vector<PotentialPtr> build_potentials(const ExperimentConfig& cfg,
                                           const EnvInterface& env) {
  const int n = env.num_agents();
  std::vector<PotentialPtr> potentials(n, zero_potential());
  if (cfg.variant == "none") return potentials;

  if (cfg.env_kind == "gridworld") {
    potentials[0] = cfg.variant == "uniform"
                        ? gridworld_uniform_potential(cfg.u0, cfg.u1)
                        : gridworld_nonuniform_potential(cfg.u0, cfg.u1, cfg.delta);
    return potentials;
  }
  if (cfg.env_kind == "mountaincar") {
    potentials[0] = cfg.variant == "uniform" ? mountaincar_uniform_potential(cfg.P)
                                             : mountaincar_nonuniform_potential();
    return potentials;
  }

  const auto& world = dynamic_cast<const ParticleWorld&>(env);
  const auto team = world.team();
  std::vector<int> anchors;
  if (world.config().task != ParticleTask::PredatorPrey) {
    anchors.resize(team.size());
    for (std::size_t j = 0; j < team.size(); ++j) anchors[j] = static_cast<int>(j);
  }
  const auto kind = cfg.variant == "uniform" ? Potential::Kind::Uniform
                                             : Potential::Kind::NonUniform;
  const ParticleAdviceParams params{cfg.alpha, cfg.beta, cfg.M};
  const PotentialPtr shared =
      particle_potential(world.config().task, kind, params, world.layout(), team, anchors,
                         world.prey_index());
  for (int i : team) potentials[i] = shared;
  return potentials;
}

std::unique_ptr<EnvInterface> build_env(const ExperimentConfig& cfg) {
  if (cfg.env_kind == "gridworld") {
    return std::make_unique<PuddleJumpGridworld>(cfg.jump_prob,
                                                 cfg.step_cap > 0 ? cfg.step_cap : 500);
  }
  if (cfg.env_kind == "mountaincar") {
    return std::make_unique<MountainCar>(cfg.step_cap > 0 ? cfg.step_cap : 999);
  }
  ParticleConfig pc;
  pc.task = cfg.task == "cn"   ? ParticleTask::CooperativeNavigation
            : cfg.task == "pd" ? ParticleTask::PhysicalDeception
                               : ParticleTask::PredatorPrey;
  pc.n = cfg.n;
  pc.episode_len = cfg.episode_len;
  return std::make_unique<ParticleWorld>(pc);
}

}  // namespace

BuiltRun build_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  BuiltRun run;
  run.env = build_env(cfg);
  const int n = run.env->num_agents();

  run.train.advice.potentials = build_potentials(cfg, *run.env);
  run.train.advice.mode = resolved_mode(cfg);
  run.train.advice.gamma = cfg.gamma;
  run.train.max_episodes = cfg.episodes;
  run.train.ircr = cfg.algorithm == "ircr";

  // observation layout probe; lengths are seed independent
  const ResetResult probe = run.env->reset(Rng::derive(seed, 0x0b5ull));
  int cat_dim = 0;
  for (const auto& o : probe.observations) cat_dim += static_cast<int>(o.size());

  UpdateRule actor_rule;
  actor_rule.alpha0 = cfg.actor_rate;
  actor_rule.adam = cfg.adam;
  UpdateRule critic_rule;
  critic_rule.alpha0 = cfg.critic_rate;
  critic_rule.adam = cfg.adam;
  if (cfg.schedule == "decay") {
    actor_rule.schedule = UpdateRule::Schedule::Decay;
    actor_rule.decay_pow = cfg.actor_decay_pow;
    actor_rule.decay_tau = cfg.decay_tau;
    critic_rule.schedule = UpdateRule::Schedule::Decay;
    critic_rule.decay_pow = cfg.critic_decay_pow;
    critic_rule.decay_tau = cfg.decay_tau;
  }

  for (int i = 0; i < n; ++i) {
    AgentHandle agent;
    agent.index = i;
    Rng init(Rng::derive(Rng::derive(seed, 0x171ull), static_cast<std::uint64_t>(i)));
    const int obs_dim = static_cast<int>(probe.observations[i].size());
    if (cfg.env_kind == "gridworld") {
      agent.policy = std::make_shared<TabularSoftmaxPolicy>(gridworld::kNumObservations,
                                                            gridworld::kNumActions);
      agent.critic = std::make_shared<LinearValue>(one_hot_features(gridworld::kNumObservations),
                                                   gridworld::kNumObservations);
    } else if (cfg.env_kind == "mountaincar") {
      agent.policy = std::make_shared<GaussianMlpPolicy>(obs_dim, 1, std::vector<int>{64}, init);
      agent.critic = std::make_shared<MlpValue>(cat_dim, std::vector<int>{64}, init);
    } else {
      // on-policy SGD at particle reward scales needs a higher exploration
      // floor or the score gradient blows up once the variance collapses
      agent.policy = std::make_shared<GaussianMlpPolicy>(obs_dim, 2, std::vector<int>{64, 64},
                                                         init, 1e-2);
      if (cfg.critic == "linear") {
        agent.critic =
            std::make_shared<LinearValue>(identity_bias_features(cat_dim), cat_dim + 1);
      } else {
        agent.critic = std::make_shared<MlpValue>(cat_dim, std::vector<int>{64, 64}, init);
      }
    }
    agent.actor_updater = ParamUpdater(actor_rule);
    agent.critic_updater = ParamUpdater(critic_rule);
    agent.projection_bound = cfg.projection_bound;
    run.agents.push_back(std::move(agent));
  }
  return run;
}

double episode_score(const std::vector<double>& raw_returns,
                     const std::vector<std::string>& roles) {
  double good = 0.0, bad = 0.0;
  int n_good = 0, n_bad = 0;
  for (std::size_t i = 0; i < raw_returns.size(); ++i) {
    if (roles[i] == "adversary" || roles[i] == "prey") {
      bad += raw_returns[i];
      ++n_bad;
    } else {
      good += raw_returns[i];
      ++n_good;
    }
  }
  const double mean_good = n_good > 0 ? good / n_good : 0.0;
  if (n_bad == 0) return mean_good;
  return mean_good - bad / n_bad;
}

namespace {

struct RunArtifacts {
  std::vector<MetricRow> rows;
  std::vector<std::pair<std::string, Vec>> checkpoints;  // (kind, params)
};

RunArtifacts run_with_artifacts(const ExperimentConfig& cfg, std::uint64_t seed) {
  BuiltRun run = build_run(cfg, seed);
  const TrainResult result = train_sam(*run.env, run.agents, run.train, seed);

  const int n = run.env->num_agents();
  std::vector<std::string> roles(n);
  for (int i = 0; i < n; ++i) roles[i] = run.env->role(i);

  char id[128];
  std::snprintf(id, sizeof id, "%s-s%llu", cfg.name.c_str(),
                static_cast<unsigned long long>(seed));

  RunArtifacts artifacts;
  for (const auto& ep : result.episodes) {
    const double score = episode_score(ep.raw_return, roles);
    for (int i = 0; i < n; ++i) {
      MetricRow row;
      row.run_id = id;
      row.seed = seed;
      row.episode = ep.episode;
      row.agent = i;
      row.role = roles[i];
      row.raw_return = ep.raw_return[i];
      row.shaped_return = ep.shaped_return[i];
      row.steps = ep.steps;
      row.success = ep.success;
      row.score = score;
      artifacts.rows.push_back(std::move(row));
    }
  }
  for (int i = 0; i < n; ++i) {
    char kind[64];
    std::snprintf(kind, sizeof kind, "actor%d", i);
    artifacts.checkpoints.emplace_back(kind, run.agents[i].policy->params());
    std::snprintf(kind, sizeof kind, "critic%d", i);
    artifacts.checkpoints.emplace_back(kind, run.agents[i].critic->params());
  }
  return artifacts;
}

void append_rows_csv(std::string& out, const std::vector<MetricRow>& rows) {
  char buf[512];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%d,%s,%.17g,%.17g,%d,%d,%.17g\n",
                  row.run_id.c_str(), static_cast<unsigned long long>(row.seed), row.episode,
                  row.agent, row.role.c_str(), row.raw_return, row.shaped_return, row.steps,
                  row.success ? 1 : 0, row.score);
    out += buf;
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::vector<MetricRow> run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_with_artifacts(cfg, seed).rows;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int jobs, std::uint64_t seed_offset) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s : cfg.seeds) seeds.push_back(s + seed_offset);

  std::vector<RunArtifacts> artifacts(seeds.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  std::vector<std::thread> pool;
  std::vector<std::string> failures(seeds.size());
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
        try {
          artifacts[i] = run_with_artifacts(cfg, seeds[i]);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!failures[i].empty()) {
      throw std::runtime_error("run for seed " + std::to_string(seeds[i]) +
                               " failed: " + failures[i]);
    }
  }

  ExperimentOutput output;
  output.resolved_config_path = out_dir + "/config.resolved.json";
  write_file(output.resolved_config_path, config_to_json(cfg));

  nlohmann::json meta;
  meta["config"] = cfg.name;
  meta["seed_offset"] = seed_offset;
  std::string summary(kCsvHeader);
  summary += "\n";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string run_id = artifacts[i].rows.empty()
                                   ? cfg.name + "-s" + std::to_string(seeds[i])
                                   : artifacts[i].rows.front().run_id;
    std::string csv(kCsvHeader);
    csv += "\n";
    append_rows_csv(csv, artifacts[i].rows);
    const std::string csv_path = out_dir + "/" + run_id + ".csv";
    write_file(csv_path, csv);
    output.run_csv_paths.push_back(csv_path);
    append_rows_csv(summary, artifacts[i].rows);

    nlohmann::json run_meta;
    run_meta["run_id"] = run_id;
    run_meta["seed"] = seeds[i];
    run_meta["csv"] = csv_path;
    for (const auto& [kind, params] : artifacts[i].checkpoints) {
      const std::string ckpt_path = out_dir + "/" + run_id + "." + kind + ".ckpt";
      save_checkpoint(ckpt_path, kind, params);
      char hex[32];
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(fnv1a64_file(ckpt_path)));
      run_meta["checkpoints"][kind] = {{"path", ckpt_path}, {"fnv1a64", hex}};
    }
    meta["runs"].push_back(run_meta);
  }
  output.summary_csv_path = out_dir + "/summary.csv";
  write_file(output.summary_csv_path, summary);
  output.meta_path = out_dir + "/meta.json";
  write_file(output.meta_path, meta.dump(2) + "\n");
  return output;
}

// -- post-processing ---------------------------------------------------------

std::vector<double> smooth(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be at least 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    out[i] = acc / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

std::vector<double> normalize_scores(const std::vector<double>& method_means, bool* degenerate) {
  if (method_means.size() < 2) {
    throw std::invalid_argument("normalization needs at least two methods");
  }
  const auto [lo_it, hi_it] = std::minmax_element(method_means.begin(), method_means.end());
  if (degenerate) *degenerate = false;
  if (*hi_it == *lo_it) {
    if (degenerate) *degenerate = true;
    return std::vector<double>(method_means.size(), 0.5);
  }
  std::vector<double> out(method_means.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (method_means[i] - *lo_it) / (*hi_it - *lo_it);
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#9467bd", "#ff7f0e", "#2ca02c",
                          "#d62728", "#8c564b", "#17becf"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void emit_plot(const std::vector<PlotSeries>& series, const std::string& out_path,
               int smooth_window) {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  struct Curve {
    std::string label;
    std::vector<double> mean, lo, hi;
  };
  std::vector<Curve> curves;
  std::size_t max_len = 0;
  for (const auto& s : series) {
    if (s.per_seed.empty()) throw std::invalid_argument("series without seeds: " + s.label);
    std::size_t len = s.per_seed.front().size();
    for (const auto& run : s.per_seed) len = std::min(len, run.size());
    if (len == 0) throw std::invalid_argument("empty series: " + s.label);
    std::vector<std::vector<double>> smoothed;
    for (const auto& run : s.per_seed) {
      std::vector<double> clipped(run.begin(), run.begin() + len);
      smoothed.push_back(smooth(clipped, smooth_window));
    }
    Curve c;
    c.label = s.label;
    for (std::size_t e = 0; e < len; ++e) {
      double m = 0.0;
      for (const auto& run : smoothed) m += run[e];
      m /= smoothed.size();
      double var = 0.0;
      for (const auto& run : smoothed) var += (run[e] - m) * (run[e] - m);
      const double sd = smoothed.size() > 1 ? std::sqrt(var / (smoothed.size() - 1)) : 0.0;
      c.mean.push_back(m);
      c.lo.push_back(m - sd);
      c.hi.push_back(m + sd);
    }
    max_len = std::max(max_len, len);
    curves.push_back(std::move(c));
  }

  double ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves) {
    for (std::size_t e = 0; e < c.mean.size(); ++e) {
      ymin = std::min(ymin, c.lo[e]);
      ymax = std::max(ymax, c.hi[e]);
    }
  }
  if (ymax == ymin) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double W = 880, H = 560, L = 70, R = 20, T = 20, B = 50;
  const double xmax = static_cast<double>(max_len > 1 ? max_len - 1 : 1);
  const auto X = [&](double e) { return L + (W - L - R) * (e / xmax); };
  const auto Y = [&](double v) { return H - B - (H - T - B) * ((v - ymin) / (ymax - ymin)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"560\" "
         "viewBox=\"0 0 880 560\">\n";
  svg += "<rect width=\"880\" height=\"560\" fill=\"white\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double e = xmax * t / 5.0;
    const double v = ymin + (ymax - ymin) * t / 5.0;
    svg += "<line x1=\"" + fmt(X(e)) + "\" y1=\"" + fmt(H - B) + "\" x2=\"" + fmt(X(e)) +
           "\" y2=\"" + fmt(T) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(Y(v)) + "\" x2=\"" + fmt(W - R) +
           "\" y2=\"" + fmt(Y(v)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt(X(e)) + "\" y=\"" + fmt(H - B + 18) +
           "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">" + fmt_tick(e) +
           "</text>\n";
    svg += "<text x=\"" + fmt(L - 8) + "\" y=\"" + fmt(Y(v) + 4) +
           "\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">" + fmt_tick(v) +
           "</text>\n";
  }
  svg += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(H - B) + "\" x2=\"" + fmt(W - R) +
         "\" y2=\"" + fmt(H - B) + "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  svg += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(H - B) + "\" x2=\"" + fmt(L) + "\" y2=\"" +
         fmt(T) + "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  svg += "<text x=\"" + fmt((L + W - R) / 2) + "\" y=\"" + fmt(H - 12) +
         "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111111\">episode</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt((T + H - B) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111111\" transform=\"rotate(-90 18 " +
         fmt((T + H - B) / 2) + ")\">score</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
    const auto& curve = curves[c];
    std::string band = "<polygon points=\"";
    for (std::size_t e = 0; e < curve.mean.size(); ++e) {
      band += fmt(X(static_cast<double>(e))) + "," + fmt(Y(curve.hi[e])) + " ";
    }
    for (std::size_t e = curve.mean.size(); e-- > 0;) {
      band += fmt(X(static_cast<double>(e))) + "," + fmt(Y(curve.lo[e])) + " ";
    }
    band += "\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    svg += band;
    std::string line = "<polyline points=\"";
    for (std::size_t e = 0; e < curve.mean.size(); ++e) {
      line += fmt(X(static_cast<double>(e))) + "," + fmt(Y(curve.mean[e])) + " ";
    }
    line += "\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.8\"/>\n";
    svg += line;
    const double ly = T + 18 + 18 * static_cast<double>(c);
    svg += "<line x1=\"" + fmt(W - R - 170) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(W - R - 140) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"3\"/>\n";
    svg += "<text x=\"" + fmt(W - R - 132) + "\" y=\"" + fmt(ly) +
           "\" font-size=\"13\" fill=\"#111111\">" + curve.label + "</text>\n";
  }
  svg += "</svg>\n";
  write_file(out_path, svg);
}

std::vector<MetricRow> load_metric_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics file: " + path);
  if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      parts.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (parts.size() != 10) throw std::runtime_error("malformed CSV row in " + path);
    MetricRow row;
    row.run_id = parts[0];
    row.seed = std::stoull(parts[1]);
    row.episode = std::stoi(parts[2]);
    row.agent = std::stoi(parts[3]);
    row.role = parts[4];
    row.raw_return = std::stod(parts[5]);
    row.shaped_return = std::stod(parts[6]);
    row.steps = std::stoi(parts[7]);
    row.success = parts[8] == "1";
    row.score = std::stod(parts[9]);
    rows.push_back(std::move(row));
  }
  return rows;
}

PlotSeries load_series_csv(const std::string& path) {
  const auto rows = load_metric_rows(path);
  if (rows.empty()) throw std::runtime_error("metrics file has no rows: " + path);
  PlotSeries series;
  // label: run id with the trailing "-s<seed>" stripped
  std::string label = rows.front().run_id;
  const std::size_t cut = label.rfind("-s");
  if (cut != std::string::npos) label = label.substr(0, cut);
  series.label = label;
  std::vector<std::uint64_t> seed_order;
  for (const auto& row : rows) {
    if (row.agent != 0) continue;  // scores repeat across agent rows
    std::size_t idx = 0;
    for (; idx < seed_order.size(); ++idx) {
      if (seed_order[idx] == row.seed) break;
    }
    if (idx == seed_order.size()) {
      seed_order.push_back(row.seed);
      series.per_seed.emplace_back();
    }
    series.per_seed[idx].push_back(row.score);
  }
  return series;
}

}  // namespace shaping::harness
