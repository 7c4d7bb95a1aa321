#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shaping/core.hpp"
#include "shaping/sam.hpp"

namespace shaping::harness {

/// Complete, seedable description of one training experiment. Parsed from a
/// versioned JSON file with strict key checking; the resolved form is echoed
/// next to the run outputs.
struct ExperimentConfig {
  int version = 1;
  std::string name = "run";

  // environment
  std::string env_kind;  // gridworld | mountaincar | particle
  double jump_prob = 0.2;
  int step_cap = 0;  // 0: per-environment default
  std::string task = "cn";
  int n = 3;
  int episode_len = 25;

  // algorithm: sas | sam | sparse | ircr
  std::string algorithm;

  // advice
  std::string variant = "none";  // none | uniform | nonuniform
  std::string mode;              // lookahead | lookback; empty = variant default
  double u0 = 0.0, u1 = 10.0, delta = 10.0;
  double P = 2.0;
  double alpha = 100.0, beta = 1.0, M = 1.0;

  // learning rates
  double actor_rate = 0.01;
  double critic_rate = 0.1;
  std::string schedule = "constant";  // constant | decay
  double actor_decay_pow = 0.9;
  double critic_decay_pow = 0.6;
  double decay_tau = 1000.0;
  bool adam = false;

  // approximators
  std::string critic = "";  // particle: mlp | linear
  std::optional<double> projection_bound;

  double gamma = 0.99;
  int episodes = 100;
  std::vector<std::uint64_t> seeds{0};
  int metrics_window = 100;
};

/// Parses and validates; every violation is listed in the thrown message.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct BuiltRun {
  std::unique_ptr<EnvInterface> env;
  std::vector<AgentHandle> agents;
  SamConfig train;
};

/// Instantiates environment, approximators, and advice for one (config,
/// seed) run. Pure function of its arguments.
BuiltRun build_run(const ExperimentConfig& cfg, std::uint64_t seed);

struct MetricRow {
  std::string run_id;
  std::uint64_t seed = 0;
  int episode = 0;
  int agent = 0;
  std::string role;
  double raw_return = 0.0;
  double shaped_return = 0.0;
  int steps = 0;
  bool success = false;
  double score = 0.0;
};

inline constexpr const char* kCsvHeader =
    "run_id,seed,episode,agent,role,raw_return,shaped_return,steps,success,score";

/// Episode score from raw returns only: mean agent reward on cooperative
/// tasks, mean agent reward minus mean adversary reward on competitive ones.
double episode_score(const std::vector<double>& raw_returns,
                     const std::vector<std::string>& roles);

/// Executes one seed. Deterministic in (cfg, seed).
std::vector<MetricRow> run_single(const ExperimentConfig& cfg, std::uint64_t seed);

struct ExperimentOutput {
  std::vector<std::string> run_csv_paths;
  std::string summary_csv_path;
  std::string resolved_config_path;
  std::string meta_path;
};

/// Runs every seed (optionally offset), writes one CSV per run plus the
/// merged summary, the resolved config echo, and run metadata with
/// checkpoint hashes. `jobs` parallelizes across runs without changing any
/// output byte.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int jobs = 1, std::uint64_t seed_offset = 0);

// -- metric post-processing ---------------------------------------------

/// Trailing moving average; partial windows at the head.
std::vector<double> smooth(const std::vector<double>& series, int window);

/// Min-max normalization of per-method window means into [0,1]. All-equal
/// inputs collapse to 0.5 with `degenerate` set.
std::vector<double> normalize_scores(const std::vector<double>& method_means,
                                     bool* degenerate = nullptr);

struct PlotSeries {
  std::string label;
  std::vector<std::vector<double>> per_seed;  // score per episode, one row per seed
};

/// Deterministic SVG line chart: one mean curve per series plus a +-1 std
/// band across seeds. Throws on empty input or IO failure.
void emit_plot(const std::vector<PlotSeries>& series, const std::string& out_path,
               int smooth_window = 1);

/// Reads metric CSV files back into plottable series (one series per file,
/// seeds separated, scores deduplicated per episode).
PlotSeries load_series_csv(const std::string& path);

std::vector<MetricRow> load_metric_rows(const std::string& path);

}  // namespace shaping::harness
