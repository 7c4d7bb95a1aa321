#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shaping/advice.hpp"
#include "shaping/core.hpp"
#include "shaping/particle_layout.hpp"

namespace shaping {

/// 10x10 gridworld with a jump-only puddle along row 2 and aliased
/// observations at (9,8)/(8,9). Reward -0.05 per action, +1000 on the goal
/// step (no step penalty on that step), terminal at the goal.
class PuddleJumpGridworld final : public EnvInterface {
public:
  explicit PuddleJumpGridworld(double jump_prob, int step_cap = 500);

  ResetResult reset(std::uint64_t seed) override;
  TransitionSample step(const std::vector<Action>& actions) override;
  ActionSpace action_space(int agent) const override;
  int num_agents() const override { return 1; }
  bool done() const override;
  bool episode_success() const override { return terminal_; }
  std::string role(int) const override { return "agent"; }
  std::string describe() const override;

  int steps_taken() const { return steps_; }

private:
  Obs observe() const;
  double jump_prob_;
  int step_cap_;
  int x_ = 0, y_ = 0;
  int steps_ = 0;
  bool terminal_ = false;
  bool started_ = false;
  Rng rng_{0};
};

/// Continuous mountain car: p in [-1.2, 0.6], v in [-0.07, 0.07],
/// a in [-1, 1]. Reward -|a|^2 before the goal, +100 on the goal step
/// (p >= 0.45). Observations scale velocity to [-1, 1].
class MountainCar final : public EnvInterface {
public:
  explicit MountainCar(int step_cap = 999);

  ResetResult reset(std::uint64_t seed) override;
  TransitionSample step(const std::vector<Action>& actions) override;
  ActionSpace action_space(int agent) const override;
  int num_agents() const override { return 1; }
  bool done() const override;
  bool episode_success() const override { return terminal_; }
  std::string role(int) const override { return "agent"; }
  std::string describe() const override;

  static constexpr double kGoalPosition = 0.45;

private:
  Obs observe() const;
  int step_cap_;
  double p_ = 0.0, v_ = 0.0;
  int steps_ = 0;
  bool terminal_ = false;
  bool started_ = false;
  Rng rng_{0};
};

struct TaskRewardSpec {
  // cooperative navigation
  double cn_reach = 10.0;
  double cn_collision = -1.0;
  // physical deception
  double pd_agent_reach = 10.0;
  double pd_adversary_reach_penalty = -10.0;
  double pd_adversary_reach = 10.0;
  // predator-prey
  double pp_predator_collision = 10.0;
  double pp_prey_collision = -10.0;
};

struct ParticleConfig {
  ParticleTask task = ParticleTask::CooperativeNavigation;
  int n = 3;  // cooperative agents (CN/PD) or predators (PP)
  int episode_len = 25;
  TaskRewardSpec rewards;
  double dt = 0.1;
  double damping = 0.25;
  double agent_radius = 0.05;
  double prey_radius = 0.04;
  double landmark_radius = 0.05;
  double obstacle_radius = 0.2;
  double accel = 3.0;
  double prey_accel = 4.0;
  double max_speed = 1.0;
  double prey_max_speed = 1.3;
  double spawn_range = 1.0;   // uniform in [-range, range]^2
  double arena_bound = 4.0;   // hard position clamp
};

/// Damped point-mass particle world hosting the three sparse-reward tasks.
/// Episodes run a fixed number of steps; rewards fire only on reach or
/// collision events. Agent order: CN agents 0..N-1; PD adversary 0 then
/// good agents 1..N; PP predators 0..N-1 then prey N.
class ParticleWorld final : public EnvInterface {
public:
  explicit ParticleWorld(ParticleConfig cfg);

  ResetResult reset(std::uint64_t seed) override;
  TransitionSample step(const std::vector<Action>& actions) override;
  ActionSpace action_space(int agent) const override;
  int num_agents() const override { return n_agents_; }
  bool done() const override;
  bool episode_success() const override { return success_events_ > 0; }
  std::string role(int agent) const override;
  std::string describe() const override;

  const ParticleConfig& config() const { return cfg_; }
  const ParticleLayout& layout() const { return layout_; }
  /// Advised team in environment order (cooperative agents / predators).
  std::vector<int> team() const;
  int prey_index() const;
  int adversary_index() const;

private:
  Obs observe(int agent) const;
  State pack_state() const;
  bool is_prey(int i) const;
  bool is_adversary(int i) const;

  ParticleConfig cfg_;
  ParticleLayout layout_;
  int n_agents_ = 0;
  int n_landmarks_ = 0;
  std::vector<Vec2> pos_, vel_;
  std::vector<Vec2> landmarks_;
  int target_ = 0;                  // PD true landmark
  std::vector<int> adversary_landmark_order_;  // PD: seed-shuffled view
  int steps_ = 0;
  long long success_events_ = 0;
  bool started_ = false;
  Rng rng_{0};
};

/// One-agent wrapper check used in tests; environments here already comply.
Trajectory rollout(EnvInterface& env, std::uint64_t seed,
                   const std::vector<std::vector<Action>>& actions);

}  // namespace shaping
