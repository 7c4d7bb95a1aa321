#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shaping/oracle.hpp"

using namespace shaping;
using namespace shaping::oracle;

TEST_CASE("value iteration") {
  SUBCASE("single-state geometric series") {
    TabularMDP mdp;
    mdp.n_states = 1;
    mdp.n_actions = 1;
    mdp.P = {1.0};
    mdp.R = {1.0};
    mdp.rho0 = {1.0};
    mdp.gamma = 0.5;
    const Vec q = value_iteration(mdp, 1e-10);
    CHECK(q[0] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("zero rewards give zero values") {
    Rng rng(1);
    TabularMDP mdp = random_mdp(rng, 4, 3);
    for (double& r : mdp.R) r = 0.0;
    const Vec q = value_iteration(mdp, 1e-10);
    for (double v : q) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("Bellman residual within tolerance") {
    Rng rng(2);
    const TabularMDP mdp = random_mdp(rng, 5, 3);
    const double tol = 1e-9;
    const Vec q = value_iteration(mdp, tol);
    for (int s = 0; s < 5; ++s) {
      for (int a = 0; a < 3; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < 5; ++s2) {
          const double* row = q.data() + s2 * 3;
          ev += mdp.p(s, a, s2) * std::max({row[0], row[1], row[2]});
        }
        CHECK(std::abs(q[s * 3 + a] - (mdp.r(s, a) + mdp.gamma * ev)) < tol);
      }
    }
  }
  SUBCASE("gamma >= 1 is rejected") {
    TabularMDP mdp;
    mdp.n_states = 1;
    mdp.n_actions = 1;
    mdp.P = {1.0};
    mdp.R = {1.0};
    mdp.rho0 = {1.0};
    mdp.gamma = 1.0;
    CHECK_THROWS_AS(value_iteration(mdp, 1e-8), std::invalid_argument);
  }
}

TEST_CASE("policy evaluation by linear solve") {
  SUBCASE("symmetric two-state chain has equal values") {
    TabularMDP mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.gamma = 0.9;
    mdp.rho0 = {0.5, 0.5};
    // symmetric under swapping states
    mdp.P = {0.7, 0.3, 0.4, 0.6, 0.3, 0.7, 0.6, 0.4};
    mdp.R = {1.0, 0.5, 1.0, 0.5};
    const Vec pi{0.5, 0.5, 0.5, 0.5};
    const auto pv = policy_q_values(mdp, pi);
    CHECK(pv.V[0] == doctest::Approx(pv.V[1]).epsilon(1e-12));
  }
  SUBCASE("deterministic absorbing chain matches the geometric sum") {
    // state 0 pays 1 then moves to absorbing state 1 with zero reward
    TabularMDP mdp;
    mdp.n_states = 2;
    mdp.n_actions = 1;
    mdp.gamma = 0.8;
    mdp.rho0 = {1.0, 0.0};
    mdp.P = {0.0, 1.0, 0.0, 1.0};
    mdp.R = {1.0, 0.0};
    const Vec pi{1.0, 1.0};
    const auto pv = policy_q_values(mdp, pi);
    CHECK(pv.Q[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pv.Q[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("matches value iteration at the greedy policy") {
    Rng rng(3);
    const TabularMDP mdp = random_mdp(rng, 5, 3);
    const Vec q = value_iteration(mdp, 1e-11);
    const auto pv = policy_q_values(mdp, greedy_policy(mdp, q));
    for (int s = 0; s < 5; ++s) {
      double best = q[s * 3];
      double best_eval = -1e300;
      for (int a = 0; a < 3; ++a) best = std::max(best, q[s * 3 + a]);
      for (int a = 0; a < 3; ++a) best_eval = std::max(best_eval, pv.Q[s * 3 + a]);
      CHECK(best == doctest::Approx(best_eval).epsilon(1e-9));
    }
  }
}

TEST_CASE("shaped model with zero potential is the base model") {
  Rng rng(4);
  const TabularMDP mdp = random_mdp(rng, 4, 2);
  const ShapedModel model{mdp, Vec(8, 0.0)};
  const Vec pi = random_policy(rng, 4, 2);
  const TabularMDP shaped = model.shaped(pi);
  CHECK(shaped.R == mdp.R);
  CHECK(shaped.P == mdp.P);
}

TEST_CASE("identity checks on trivial controls") {
  Rng rng(5);
  const TabularMDP mdp = random_mdp(rng, 4, 3);
  const Vec pi = random_policy(rng, 4, 3);

  SUBCASE("zero potential: q-shift deviation vanishes") {
    CHECK(check_q_shift(mdp, Vec(12, 0.0), pi) < 1e-12);
  }
  SUBCASE("constant potential shifts J by exactly -c") {
    const Vec phi_c(4, 3.7);
    const ShapedModel model{mdp, Vec(12, 0.0)};
    const TabularMDP shaped = model.shaped_state_only(phi_c);
    const auto base = policy_q_values(mdp, pi);
    const auto sh = policy_q_values(shaped, pi);
    double j_base = 0.0, j_shaped = 0.0;
    for (int s = 0; s < 4; ++s) {
      j_base += mdp.rho0[s] * base.V[s];
      j_shaped += mdp.rho0[s] * sh.V[s];
    }
    CHECK(j_shaped == doctest::Approx(j_base - 3.7).epsilon(1e-10));
    CHECK(check_return_shift(mdp, Vec(4, 0.0), {pi}) < 1e-12);
  }
}

TEST_CASE("lookback zero mean requires an ergodic chain") {
  TabularMDP mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.gamma = 0.9;
  mdp.rho0 = {1.0, 0.0};
  mdp.P = {1.0, 0.0, 0.0, 1.0};  // two absorbing components: reducible
  mdp.R = {0.0, 0.0};
  const Vec theta(2, 0.0);
  const Vec phi(2, 1.0);
  CHECK_THROWS_AS(check_lookback_zero_mean(mdp, phi, theta), std::runtime_error);
}

TEST_CASE("reinforce bias enumeration guard") {
  Rng rng(6);
  const TabularMDP mdp = random_mdp(rng, 4, 4);
  const Vec theta = random_theta(rng, 4, 4);
  const Vec phi = random_state_action_potential(rng, mdp);
  CHECK_THROWS_AS(check_reinforce_bias(mdp, phi, theta, 12), std::invalid_argument);
}

TEST_CASE("td fixed point on one-hot features equals the policy value") {
  Rng rng(7);
  const TabularMDP mdp = random_mdp(rng, 4, 2);
  const Vec pi = random_policy(rng, 4, 2);
  std::vector<Vec> one_hot(4, Vec(4, 0.0));
  for (int s = 0; s < 4; ++s) one_hot[s][s] = 1.0;
  const Vec omega = exact_td_fixed_point(mdp, pi, one_hot);
  const auto pv = policy_q_values(mdp, pi);
  for (int s = 0; s < 4; ++s) CHECK(omega[s] == doctest::Approx(pv.V[s]).epsilon(1e-10));
}

TEST_CASE("td fixed point with a constant feature matches the scalar solve") {
  Rng rng(8);
  const TabularMDP mdp = random_mdp(rng, 5, 2);
  const Vec pi = random_policy(rng, 5, 2);
  const std::vector<Vec> constant(5, Vec{1.0});
  const Vec omega = exact_td_fixed_point(mdp, pi, constant);
  // with phi == 1 the projected equation reduces to w = mean reward / (1 - gamma)
  const Vec mu = stationary_distribution(mdp, pi);
  double mean_r = 0.0;
  for (int s = 0; s < 5; ++s) {
    for (int a = 0; a < 2; ++a) mean_r += mu[s] * pi[s * 2 + a] * mdp.r(s, a);
  }
  CHECK(omega[0] == doctest::Approx(mean_r / (1.0 - mdp.gamma)).epsilon(1e-10));
}

TEST_CASE("rank-deficient features are rejected") {
  Rng rng(9);
  const TabularMDP mdp = random_mdp(rng, 4, 2);
  const Vec pi = random_policy(rng, 4, 2);
  const std::vector<Vec> collinear(4, Vec{1.0, 2.0});
  CHECK_THROWS_AS(exact_td_fixed_point(mdp, pi, collinear), std::runtime_error);
}

TEST_CASE("theorem-3 bound rejects non-stationary points") {
  Rng rng(10);
  const TabularGame game = random_game(rng, 3, {2, 2}, 0.8, true);
  GameAdvice advice;
  for (int i = 0; i < 2; ++i) advice.phi.push_back(Vec(3 * 4, 0.25));
  std::vector<std::vector<Vec>> features(2);
  for (int i = 0; i < 2; ++i) {
    features[i].assign(3, Vec(3, 0.0));
    for (int s = 0; s < 3; ++s) features[i][s][s] = 1.0;
  }
  SamOdePoint bogus;
  bogus.thetas = {random_theta(rng, 3, 2), random_theta(rng, 3, 2)};
  bogus.omegas = {Vec(3, 0.0), Vec(3, 0.0)};
  CHECK_THROWS_AS(check_theorem3_bound(game, advice, features, bogus), std::invalid_argument);
}

TEST_CASE("discounted visitation sums to the discounted horizon") {
  Rng rng(11);
  const TabularMDP mdp = random_mdp(rng, 5, 3);
  const Vec pi = random_policy(rng, 5, 3);
  const Vec d = discounted_visitation(mdp, pi);
  double total = 0.0;
  for (double v : d) total += v;
  CHECK(total == doctest::Approx(1.0 / (1.0 - mdp.gamma)).epsilon(1e-10));
}
