#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shaping/rng.hpp"

namespace shaping {

// Every environment in this repo is a stochastic game; single-agent
// environments are 1-agent games (all per-agent lists have length 1).
using State = std::vector<double>;
using Obs = std::vector<double>;
using Action = std::vector<double>;
using Vec = std::vector<double>;

/// Discount factor gamma in [0, 1].
struct DiscountFactor {
  double gamma = 1.0;
  DiscountFactor() = default;
  explicit DiscountFactor(double g);
};

/// One environment step. `rewards` holds the raw environment reward only;
/// shaping advice never enters a TransitionSample.
struct TransitionSample {
  State state;
  std::vector<Obs> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;
  State next_state;
  std::vector<Obs> next_observations;
  bool terminal = false;

  bool operator==(const TransitionSample&) const = default;
};

struct Trajectory {
  std::vector<TransitionSample> steps;
  std::uint64_t episode_seed = 0;

  bool operator==(const Trajectory&) const = default;
};

struct ActionSpace {
  enum class Kind { Discrete, Box };
  Kind kind = Kind::Discrete;
  int count = 0;                  // Discrete: number of actions
  std::vector<double> low, high;  // Box bounds
  int dim() const { return kind == Kind::Discrete ? 1 : static_cast<int>(low.size()); }
};

struct ResetResult {
  State state;
  std::vector<Obs> observations;
};

/// Abstract environment contract. Instances own their RNG; reset(seed)
/// fully determines the episode given the action sequence.
class EnvInterface {
public:
  virtual ~EnvInterface() = default;

  virtual ResetResult reset(std::uint64_t seed) = 0;

  /// Advances one step. Throws std::logic_error if called after done().
  virtual TransitionSample step(const std::vector<Action>& actions) = 0;

  virtual ActionSpace action_space(int agent) const = 0;
  virtual int num_agents() const = 0;

  /// True when the episode is over (terminal state reached or step cap hit).
  virtual bool done() const = 0;

  /// Whether the episode satisfied the task's success criterion so far.
  virtual bool episode_success() const = 0;

  virtual std::string role(int agent) const = 0;

  /// Resolved constants for audit.
  virtual std::string describe() const = 0;
};

/// Sum_k gamma^k * rewards[k]; empty input returns 0.
double discounted_return(std::span<const double> rewards, double gamma);

struct TrajectoryIssue {
  bool ok = true;
  int index = -1;
  std::string what;
};

/// Checks the Trajectory invariants: consecutive states chain
/// (steps[k].next_state == steps[k+1].state) and terminal only at the end.
/// Reports the first violating index; never throws.
TrajectoryIssue validate_trajectory(const Trajectory& traj);

/// Deterministic stream for a given seed (see Rng).
Rng seeded_rng(std::uint64_t seed);

}  // namespace shaping
