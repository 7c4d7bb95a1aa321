#include "shaping/core.hpp"

#include <cmath>
#include <stdexcept>

namespace shaping {

DiscountFactor::DiscountFactor(double g) : gamma(g) {
  if (!(g >= 0.0 && g <= 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1]");
  }
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

TrajectoryIssue validate_trajectory(const Trajectory& traj) {
  const auto& steps = traj.steps;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& s = steps[k];
    const std::size_t n = s.actions.size();
    if (s.rewards.size() != n || s.observations.size() != n ||
        s.next_observations.size() != n) {
      return {false, static_cast<int>(k), "per-agent list lengths disagree"};
    }
    for (double r : s.rewards) {
      if (!std::isfinite(r)) {
        return {false, static_cast<int>(k), "non-finite reward"};
      }
    }
    if (k + 1 < steps.size()) {
      if (s.terminal) {
        return {false, static_cast<int>(k), "terminal step before the end"};
      }
      if (s.next_state != steps[k + 1].state) {
        return {false, static_cast<int>(k + 1), "next_state does not chain to state"};
      }
    }
  }
  return {};
}

Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace shaping
