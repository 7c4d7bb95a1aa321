#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "shaping/core.hpp"
#include "shaping/particle_layout.hpp"

namespace shaping {

/// A bounded heuristic over states (uniform) or state-action pairs
/// (nonuniform). Potentials of terminal states are zero by convention;
/// callers signal that through the sentinel arguments of the advice
/// functions rather than through the potential itself.
class Potential {
public:
  enum class Kind { Uniform, NonUniform };
  virtual ~Potential() = default;
  virtual double evaluate(const State& state, const std::vector<Action>& joint_action,
                          int agent_index) const = 0;
  virtual Kind kind() const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

enum class AdviceMode { LookAhead, LookBack };

struct AdviceConfig {
  std::vector<PotentialPtr> potentials;  // one per agent
  AdviceMode mode = AdviceMode::LookAhead;
  double gamma = 1.0;

  /// Throws if gamma == 0 under LookBack or a potential is missing.
  void validate() const;
  const Potential& potential(int agent_index) const;
};

struct StateActionPair {
  State state;
  std::vector<Action> joint_action;
};

/// Look-ahead advice F = gamma * phi(next) - phi(current).
/// `next` is disengaged when the next state is terminal (phi := 0 there).
double lookahead_advice(const AdviceConfig& cfg, const StateActionPair& current,
                        const std::optional<StateActionPair>& next, int agent_index);

/// Look-back advice F = phi(current) - phi(previous) / gamma.
/// `previous` is disengaged at t=0, where the sentinel potential is 0.
double lookback_advice(const AdviceConfig& cfg, const std::optional<StateActionPair>& previous,
                       const StateActionPair& current, int agent_index);

/// Term added to the TD error in the actor update: phi(current) under
/// look-ahead advice, 0 under look-back.
double actor_correction(const AdviceConfig& cfg, const StateActionPair& current,
                        int agent_index);

// -- concrete potentials ----------------------------------------------------

PotentialPtr zero_potential();
PotentialPtr constant_potential(double value);

/// phi(s) = u0 for rows 0 and 1, u1 elsewhere. Requires u1 > u0.
PotentialPtr gridworld_uniform_potential(double u0, double u1);

/// State-action variant built on the uniform one: the delta budget is split
/// so that good actions (those whose deterministic movement strictly
/// decreases the L1 distance to the goal, jumps counted by their success
/// destination) sit above phi_u(s) and the rest below, with the exact mean
/// constraint (1/|A|) sum_a phi(s,a) = phi_u(s). Requires delta > 0.
PotentialPtr gridworld_nonuniform_potential(double u0, double u1, double delta);

/// phi(s) = p + P, positive on p in [-1.2, 0.6]. Requires P >= 1.2.
PotentialPtr mountaincar_uniform_potential(double P);

/// phi(s, a) = 1 if a*v > 0 else 0 (rewards pushing with the momentum).
PotentialPtr mountaincar_nonuniform_potential();

enum class ParticleTask { CooperativeNavigation, PhysicalDeception, PredatorPrey };

struct ParticleAdviceParams {
  double alpha = 100.0;
  double beta = 1.0;
  double M = 1.0;
};

/// Team potentials for the particle-world tasks.
///   CN/PD uniform:  alpha * exp(-beta * sum_j dist(agent_j, anchored landmark_j))
///   PP uniform:     alpha * exp(-beta * sum_j dist(predator_j, prey))
///   nonuniform:     uniform minus M * angle terms (own angle for CN/PD,
///                   summed over all predators for PP)
/// `team` lists the advised agents in environment order; `anchors` gives the
/// landmark anchored to each team member (CN/PD; must be a bijection onto
/// the landmarks). Agents outside the team have potential 0.
PotentialPtr particle_potential(ParticleTask task, Potential::Kind variant,
                                const ParticleAdviceParams& params,
                                const ParticleLayout& layout, std::vector<int> team,
                                std::vector<int> anchors, int prey_index = -1);

/// Known-bad control from the experiments: phi = sum_j dist(agent_j, target_j),
/// kept only as a negative exemplar for the docs and tests.
PotentialPtr particle_linear_distance_potential(const ParticleLayout& layout,
                                                std::vector<int> team, std::vector<int> anchors,
                                                int prey_index = -1);

/// Angle in [0, pi] between `action_vec` and the vector from `position` to
/// `target`. Zero-magnitude actions map to pi/2; position == target maps to 0.
double angle_to_target(const Vec2& action_vec, const Vec2& position, const Vec2& target);

/// Deterministic agent -> landmark bijection by index order. Throws on
/// unequal counts.
std::vector<int> anchor_assignment(const std::vector<Vec2>& agent_positions,
                                   const std::vector<Vec2>& landmark_positions);

}  // namespace shaping
