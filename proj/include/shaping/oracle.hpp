#pragma once

#include <span>
#include <vector>

#include "shaping/core.hpp"

namespace shaping::oracle {

using shaping::Vec;

// -- exact models --------------------------------------------------------

/// Dense tabular MDP. P is [s][a][s'] row-stochastic, R is [s][a].
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  Vec P;
  Vec R;
  Vec rho0;
  double gamma = 0.9;

  double p(int s, int a, int s2) const {
    return P[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return R[static_cast<std::size_t>(s) * n_actions + a]; }
  void validate() const;  // rows sum to 1 (1e-12), rewards finite
};

/// Dense tabular stochastic game with factored joint actions. Observations
/// are the state itself (the simplest CTDE case).
struct TabularGame {
  int n_states = 0;
  std::vector<int> n_actions;  // per agent
  Vec P;                       // [s][joint][s']
  std::vector<Vec> R;          // per agent, [s][joint]
  Vec rho0;
  double gamma = 0.9;

  int n_agents() const { return static_cast<int>(n_actions.size()); }
  int n_joint() const;
  int joint_index(std::span<const int> actions) const;
  void decompose(int joint, std::span<int> actions) const;
  double p(int s, int ja, int s2) const {
    return P[(static_cast<std::size_t>(s) * n_joint() + ja) * n_states + s2];
  }
};

/// A base model plus a state-action potential under look-ahead advice.
/// The shaped reward uses the expected advice under a given policy, which
/// is what the exact Q-shift identity is stated for. A zero potential
/// reproduces the base model bit-for-bit.
struct ShapedModel {
  TabularMDP base;
  Vec phi;  // [s][a]

  TabularMDP shaped(const Vec& pi) const;
  /// For state-only potentials (phi constant across actions) the shaped
  /// reward is policy independent.
  TabularMDP shaped_state_only(const Vec& phi_s) const;
};

// -- exact computations -----------------------------------------------------

/// Optimal Q within `tol` in sup norm (throws when gamma >= 1).
Vec value_iteration(const TabularMDP& mdp, double tol);

Vec greedy_policy(const TabularMDP& mdp, const Vec& q);

struct PolicyValues {
  Vec Q;  // [s][a]
  Vec V;  // [s]
};
/// Exact linear solve of the Bellman evaluation equations.
PolicyValues policy_q_values(const TabularMDP& mdp, const Vec& pi);

/// Unnormalized discounted state visitation sum_t gamma^t P(s_t = s).
Vec discounted_visitation(const TabularMDP& mdp, const Vec& pi);

/// Stationary distribution of the policy-induced chain. Throws when the
/// chain is reducible.
Vec stationary_distribution(const TabularMDP& mdp, const Vec& pi);

Vec softmax_policy(const Vec& theta, int n_states, int n_actions);

// -- identity checks ---------------------------------------------------------

/// max |Q_M - (Q_M' + phi)| over state-action pairs, both sides by exact
/// solves with look-ahead advice under `pi`.
double check_q_shift(const TabularMDP& mdp, const Vec& phi_sa, const Vec& pi);

struct OptimalShiftReport {
  double deviation = 0.0;
  bool argmax_preserved = false;
};
/// State-only potential against optimal values: Q*_M' = Q*_M - phi(s) and
/// greedy argmax sets coincide.
OptimalShiftReport check_q_shift_optimal(const TabularMDP& mdp, const Vec& phi_s, double vi_tol);

/// max |J_M'(pi) - (J_M(pi) - rho0 . phi)| over the supplied policies.
double check_return_shift(const TabularMDP& mdp, const Vec& phi_s,
                          const std::vector<Vec>& policies);

/// Exact policy-gradient comparison: the plain gradient versus the shaped
/// advantage-plus-correction form, both under the discounted visitation.
/// Returns the max-norm difference.
double check_unbiased_correction(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta);

/// Stationary expectation of E[phi(prev)|s] * score. Exactly zero by the
/// per-state score identity; `score_offset` shifts every score component
/// (the negative control). Returns the max norm.
double check_lookback_zero_mean(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta,
                                double score_offset = 0.0);

/// Exhaustive trajectory enumeration to horizon T: gap between the Monte
/// Carlo policy gradient with and without look-ahead advice folded into the
/// return. Generically nonzero.
double check_reinforce_bias(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta, int T);

// -- TD fixed points -----------------------------------------------------

/// Solves the stationary-weighted projected Bellman system for linear
/// features (rows of `features` indexed by state). Throws when the feature
/// matrix is rank deficient.
Vec exact_td_fixed_point(const TabularMDP& mdp, const Vec& pi, const std::vector<Vec>& features);

/// Core solver on an explicit chain (used for games as well).
Vec td_fixed_point_core(const Vec& P_pi, const Vec& r_pi, const Vec& weights, double gamma,
                        const std::vector<Vec>& features, int n_states);

/// Simulated TD(0) under a frozen policy with Robbins-Monro rates; returns
/// the tail-averaged iterate.
Vec simulate_td0(const TabularMDP& mdp, const Vec& pi, const std::vector<Vec>& features,
                 long long steps, Rng& rng);

// -- multi-agent convergence bound ----------------------------------------

struct GameAdvice {
  std::vector<Vec> phi;  // per agent, [s][joint], look-ahead mode
};

struct SamOdePoint {
  std::vector<Vec> thetas;  // per agent softmax params [s][a_i]
  std::vector<Vec> omegas;  // per agent critic weights
  double residual = 0.0;    // sup norm of the actor vector field at the point
};

/// Follows the exact two-timescale ODE (critics at their exact TD fixed
/// points) with adaptive step sizes until the actor field drops below tol.
SamOdePoint find_sam_ode_equilibrium(const TabularGame& game, const GameAdvice& advice,
                                     const std::vector<std::vector<Vec>>& features,
                                     std::vector<Vec> thetas0, long long max_iters, double tol);

struct Theorem3Report {
  std::vector<double> lhs;  // ||grad_i J_i||_2 in the original game
  std::vector<double> rhs;  // C_i * E_i
  bool holds = false;
};

/// Gradient-norm bound at a stationary point of the shaped update. Throws
/// if the supplied point is not stationary within `residual_tol`.
Theorem3Report check_theorem3_bound(const TabularGame& game, const GameAdvice& advice,
                                    const std::vector<std::vector<Vec>>& features,
                                    const SamOdePoint& point, double residual_tol = 1e-8,
                                    double slack = 1e-9);

// -- random instances ---------------------------------------------------

TabularMDP random_mdp(Rng& rng, int n_states, int n_actions, double gamma_lo = 0.5,
                      double gamma_hi = 0.99);
Vec random_state_action_potential(Rng& rng, const TabularMDP& mdp, double scale = 1.0);
Vec random_state_potential(Rng& rng, const TabularMDP& mdp, double scale = 1.0);
Vec random_policy(Rng& rng, int n_states, int n_actions);
Vec random_theta(Rng& rng, int n_states, int n_actions, double scale = 1.0);
TabularGame random_game(Rng& rng, int n_states, const std::vector<int>& n_actions,
                        double gamma, bool identical_interest);

// -- shared linear algebra -------------------------------------------------

/// Dense solve by Gaussian elimination with partial pivoting; throws on a
/// singular (or rank-deficient) system.
Vec solve_linear(Vec a, Vec b, int n);

}  // namespace shaping::oracle
