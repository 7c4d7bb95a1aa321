#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "shaping/envs.hpp"
#include "shaping/harness.hpp"
#include "shaping/verify.hpp"

namespace {

using shaping::harness::ExperimentConfig;

int cmd_train(const std::string& config_path, const std::string& out_dir, int jobs,
              std::uint64_t seed_offset) {
  const ExperimentConfig cfg = shaping::harness::load_config(config_path);
  const auto output = shaping::harness::run_experiment(cfg, out_dir, jobs, seed_offset);
  std::printf("wrote %zu run files, summary %s\n", output.run_csv_paths.size(),
              output.summary_csv_path.c_str());
  return 0;
}

int cmd_verify(const std::string& suite) {
  const auto rows = shaping::verify::run_verify(suite);
  shaping::verify::print_rows(rows, stdout);
  return shaping::verify::all_pass(rows) ? 0 : 1;
}

int cmd_plot(const std::vector<std::string>& metrics, const std::string& out, int window) {
  std::vector<shaping::harness::PlotSeries> series;
  for (const auto& path : metrics) {
    series.push_back(shaping::harness::load_series_csv(path));
  }
  shaping::harness::emit_plot(series, out, window);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_describe(const std::string& config_path) {
  const ExperimentConfig cfg = shaping::harness::load_config(config_path);
  const auto run = shaping::harness::build_run(cfg, cfg.seeds.front());
  std::printf("%s", shaping::harness::config_to_json(cfg).c_str());
  std::printf("---\n%s", run.env->describe().c_str());
  std::printf("---\nagents: %d\n", run.env->num_agents());
  for (int i = 0; i < run.env->num_agents(); ++i) {
    std::printf("  agent %d (%s): actor params %zu, critic params %zu\n", i,
                run.env->role(i).c_str(), run.agents[i].policy->param_count(),
                run.agents[i].critic->param_count());
  }
  return 0;
}

int cmd_bench() {
  using clock = std::chrono::steady_clock;
  const auto throughput = [](shaping::EnvInterface& env, int episodes) {
    shaping::Rng rng(7);
    long long steps = 0;
    const auto start = clock::now();
    for (int ep = 0; ep < episodes; ++ep) {
      env.reset(ep);
      while (!env.done()) {
        std::vector<shaping::Action> joint;
        for (int i = 0; i < env.num_agents(); ++i) {
          const auto space = env.action_space(i);
          if (space.kind == shaping::ActionSpace::Kind::Discrete) {
            joint.push_back({static_cast<double>(rng.uniform_int(space.count))});
          } else {
            shaping::Action a;
            for (std::size_t d = 0; d < space.low.size(); ++d) {
              a.push_back(rng.uniform(space.low[d], space.high[d]));
            }
            joint.push_back(a);
          }
        }
        env.step(joint);
        ++steps;
      }
    }
    const double sec = std::chrono::duration<double>(clock::now() - start).count();
    return std::pair<double, long long>(steps / sec, steps);
  };

  shaping::PuddleJumpGridworld grid(0.2);
  auto [gps, gsteps] = throughput(grid, 50);
  std::printf("gridworld      %12.0f env steps/s (%lld steps)\n", gps, gsteps);
  shaping::MountainCar car;
  auto [mps, msteps] = throughput(car, 20);
  std::printf("mountain car   %12.0f env steps/s (%lld steps)\n", mps, msteps);
  shaping::ParticleConfig pc;
  shaping::ParticleWorld world(pc);
  auto [pps, psteps] = throughput(world, 400);
  std::printf("particle (CN)  %12.0f env steps/s (%lld steps)\n", pps, psteps);

  ExperimentConfig cfg;
  cfg.name = "bench";
  cfg.env_kind = "particle";
  cfg.task = "cn";
  cfg.n = 3;
  cfg.algorithm = "sam";
  cfg.variant = "nonuniform";
  cfg.mode = "lookback";
  cfg.actor_rate = 1e-4;
  cfg.critic_rate = 1e-3;
  cfg.gamma = 0.95;
  cfg.episodes = 200;
  const auto start = clock::now();
  shaping::harness::run_single(cfg, 0);
  const double sec = std::chrono::duration<double>(clock::now() - start).count();
  std::printf("sam training   %12.0f episodes/s (CN n=3, mlp critics)\n", cfg.episodes / sec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potential-based shaping advice toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string out_dir = "runs";
  int jobs = 1;
  std::uint64_t seed_offset = 0;
  if (const char* env_dir = std::getenv("SHAPING_OUT_DIR")) out_dir = env_dir;
  app.add_option("--out-dir", out_dir, "output directory for metrics and plots");
  app.add_option("--jobs", jobs, "parallel (config, seed) runs");
  app.add_option("--seed-offset", seed_offset, "added to every configured seed");

  std::string train_config;
  auto* train = app.add_subcommand("train", "run the experiments described by a config file");
  train->add_option("config", train_config, "JSON experiment config")->required();

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run the oracle and property suites");
  verify->add_option("--suite", suite, "all | advice | oracle | gradients");

  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg";
  int plot_window = 1;
  auto* plot = app.add_subcommand("plot", "render metric CSVs as an SVG learning curve");
  plot->add_option("metrics", plot_inputs, "metric CSV files (one series each)")->required();
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--window", plot_window, "trailing smoothing window");

  std::string describe_config;
  auto* describe = app.add_subcommand("describe", "print resolved constants for a config");
  describe->add_option("config", describe_config, "JSON experiment config")->required();

  app.add_subcommand("bench", "environment and trainer throughput report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("train")) return cmd_train(train_config, out_dir, jobs, seed_offset);
    if (app.got_subcommand("verify")) return cmd_verify(suite);
    if (app.got_subcommand("plot")) return cmd_plot(plot_inputs, plot_out, plot_window);
    if (app.got_subcommand("describe")) return cmd_describe(describe_config);
    if (app.got_subcommand("bench")) return cmd_bench();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
