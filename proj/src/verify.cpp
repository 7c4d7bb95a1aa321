#include "shaping/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "shaping/advice.hpp"
#include "shaping/approx.hpp"
#include "shaping/envs.hpp"
#include "shaping/gridworld_rules.hpp"
#include "shaping/oracle.hpp"
#include "shaping/sam.hpp"

namespace shaping::verify {

namespace {

using oracle::TabularGame;
using oracle::TabularMDP;

CheckRow bounded(std::string suite, std::string name, int instances, double deviation,
                 double tolerance) {
  CheckRow row{std::move(suite), std::move(name), instances, deviation, tolerance, false};
  row.pass = deviation <= tolerance;
  return row;
}

CheckRow exceeds(std::string suite, std::string name, int instances, double deviation,
                 double floor) {
  CheckRow row{std::move(suite), std::move(name), instances, deviation, floor, false};
  row.pass = deviation > floor;
  return row;
}

// random potentials over the gridworld for the telescoping property
PotentialPtr pick_potential(Rng& rng, int which) {
  switch (which % 4) {
    case 0: return gridworld_uniform_potential(0.0, rng.uniform(1.0, 10.0));
    case 1: return gridworld_nonuniform_potential(0.0, rng.uniform(1.0, 10.0),
                                                  rng.uniform(1.0, 10.0));
    case 2: return constant_potential(rng.uniform(-3.0, 3.0));
    default: return zero_potential();
  }
}

}  // namespace

std::vector<CheckRow> run_advice_suite() {
  std::vector<CheckRow> rows;

  // telescoping sum of discounted look-ahead advice over real episodes
  {
    double worst = 0.0;
    const int instances = 120;
    for (int k = 0; k < instances; ++k) {
      Rng rng(9000 + k);
      PuddleJumpGridworld env(0.3, 40);
      env.reset(rng.next_u64());
      AdviceConfig cfg;
      cfg.potentials = {pick_potential(rng, k)};
      cfg.mode = AdviceMode::LookAhead;
      cfg.gamma = k % 3 == 0 ? 1.0 : rng.uniform(0.5, 0.99);
      std::vector<StateActionPair> pairs;
      std::optional<StateActionPair> final_pair;
      bool terminal = false;
      while (!env.done()) {
        Action a{static_cast<double>(rng.uniform_int(gridworld::kNumActions))};
        TransitionSample tr = env.step({a});
        pairs.push_back({tr.state, tr.actions});
        terminal = tr.terminal;
        if (tr.terminal) {
          final_pair.reset();
        } else {
          final_pair = StateActionPair{
              tr.next_state, {Action{static_cast<double>(rng.uniform_int(5))}}};
        }
      }
      double sum = 0.0, w = 1.0;
      for (std::size_t t = 0; t < pairs.size(); ++t) {
        const bool last = t + 1 == pairs.size();
        const std::optional<StateActionPair>& next =
            last ? final_pair : std::optional<StateActionPair>(pairs[t + 1]);
        sum += w * lookahead_advice(cfg, pairs[t], next, 0);
        w *= cfg.gamma;
      }
      const double phi_T =
          (terminal || !final_pair)
              ? 0.0
              : cfg.potentials[0]->evaluate(final_pair->state, final_pair->joint_action, 0);
      const double expected =
          w * phi_T - cfg.potentials[0]->evaluate(pairs[0].state, pairs[0].joint_action, 0);
      worst = std::max(worst, std::abs(sum - expected));
    }
    rows.push_back(bounded("advice", "lookahead telescoping", instances, worst, 1e-12));
  }

  // gamma=1 cycle: out-and-back walks end where they started
  {
    double worst = 0.0;
    const int instances = 100;
    for (int k = 0; k < instances; ++k) {
      Rng rng(17000 + k);
      AdviceConfig cfg;
      cfg.potentials = {pick_potential(rng, k)};
      cfg.mode = AdviceMode::LookAhead;
      cfg.gamma = 1.0;
      // random out-and-back loop of states in rows 0..1 and 3..9
      std::vector<StateActionPair> pairs;
      const int half = 2 + rng.uniform_int(6);
      for (int j = 0; j < half; ++j) {
        State s{static_cast<double>(rng.uniform_int(10)),
                static_cast<double>(rng.uniform_int(10))};
        pairs.push_back({s, {Action{static_cast<double>(rng.uniform_int(5))}}});
      }
      for (int j = half - 2; j >= 0; --j) pairs.push_back(pairs[j]);
      pairs.push_back(pairs[0]);  // (s_T, a_T) == (s_0, a_0)
      double sum = 0.0;
      for (std::size_t t = 0; t + 1 < pairs.size(); ++t) {
        sum += lookahead_advice(cfg, pairs[t], pairs[t + 1], 0);
      }
      worst = std::max(worst, std::abs(sum));
    }
    rows.push_back(bounded("advice", "gamma=1 cycle advice sums to zero", instances, worst,
                           1e-12));
  }

  // uniform potentials ignore the action
  {
    double worst = 0.0;
    const int instances = 100;
    ParticleLayout layout{3, 3, false};
    const auto uniform = particle_potential(ParticleTask::CooperativeNavigation,
                                            Potential::Kind::Uniform, {}, layout, {0, 1, 2},
                                            {0, 1, 2});
    for (int k = 0; k < instances; ++k) {
      Rng rng(21000 + k);
      State s(layout.state_dim());
      for (double& v : s) v = rng.uniform(-1.0, 1.0);
      std::vector<Action> ja{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                             {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                             {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
      std::vector<Action> jb{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                             {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                             {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst,
                         std::abs(uniform->evaluate(s, ja, i) - uniform->evaluate(s, jb, i)));
      }
    }
    rows.push_back(bounded("advice", "uniform potentials constant in actions", instances, worst,
                           0.0));
  }

  // gridworld nonuniform mean constraint at every state
  {
    double worst = 0.0;
    const auto uniform = gridworld_uniform_potential(0.0, 10.0);
    const auto nonuniform = gridworld_nonuniform_potential(0.0, 10.0, 10.0);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) {
        State s{static_cast<double>(x), static_cast<double>(y)};
        double mean = 0.0;
        for (int a = 0; a < 5; ++a) {
          mean += nonuniform->evaluate(s, {Action{static_cast<double>(a)}}, 0);
        }
        mean /= 5.0;
        worst = std::max(worst, std::abs(mean - uniform->evaluate(s, {Action{0.0}}, 0)));
      }
    }
    rows.push_back(bounded("advice", "gridworld nonuniform mean constraint", 100, worst, 0.0));
  }

  // angle invariance to action rescaling and uniform translation
  {
    double worst = 0.0;
    const int instances = 200;
    for (int k = 0; k < instances; ++k) {
      Rng rng(25000 + k);
      const Vec2 a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Vec2 p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const Vec2 tgt{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const Vec2 shift{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const double scale = rng.uniform(0.1, 5.0);
      const double base = angle_to_target(a, p, tgt);
      worst = std::max(worst, std::abs(angle_to_target(a * scale, p, tgt) - base));
      worst = std::max(worst, std::abs(angle_to_target(a, p + shift, tgt + shift) - base));
    }
    rows.push_back(bounded("advice", "angle invariances", instances, worst, 1e-9));
  }

  // look-ahead correction shares the evaluation path with the advice
  {
    double worst = 0.0;
    const int instances = 100;
    for (int k = 0; k < instances; ++k) {
      Rng rng(29000 + k);
      AdviceConfig ahead;
      ahead.potentials = {pick_potential(rng, k)};
      ahead.mode = AdviceMode::LookAhead;
      ahead.gamma = rng.uniform(0.5, 1.0);
      AdviceConfig back = ahead;
      back.mode = AdviceMode::LookBack;
      StateActionPair cur{{static_cast<double>(rng.uniform_int(10)),
                           static_cast<double>(rng.uniform_int(10))},
                          {Action{static_cast<double>(rng.uniform_int(5))}}};
      StateActionPair next{{static_cast<double>(rng.uniform_int(10)),
                            static_cast<double>(rng.uniform_int(10))},
                           {Action{static_cast<double>(rng.uniform_int(5))}}};
      const double phi_cur =
          ahead.potentials[0]->evaluate(cur.state, cur.joint_action, 0);
      const double implied =
          ahead.gamma * ahead.potentials[0]->evaluate(next.state, next.joint_action, 0) -
          lookahead_advice(ahead, cur, next, 0);
      worst = std::max(worst, std::abs(actor_correction(ahead, cur, 0) - phi_cur));
      worst = std::max(worst, std::abs(actor_correction(ahead, cur, 0) - implied));
      worst = std::max(worst, std::abs(actor_correction(back, cur, 0)));
    }
    rows.push_back(bounded("advice", "actor correction path consistency", instances, worst,
                           1e-12));
  }

  return rows;
}

std::vector<CheckRow> run_oracle_suite() {
  std::vector<CheckRow> rows;
  const int instances = 100;

  {
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(41000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(5), 2 + rng.uniform_int(3));
      const Vec phi = oracle::random_state_action_potential(rng, mdp);
      const Vec pi = oracle::random_policy(rng, mdp.n_states, mdp.n_actions);
      worst = std::max(worst, oracle::check_q_shift(mdp, phi, pi));
    }
    rows.push_back(bounded("oracle", "check_q_shift", instances, worst, 1e-9));
  }

  {
    double worst = 0.0;
    bool argmax_ok = true;
    for (int k = 0; k < instances; ++k) {
      Rng rng(45000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(5), 2 + rng.uniform_int(3));
      const Vec phi = oracle::random_state_potential(rng, mdp);
      const auto report = oracle::check_q_shift_optimal(mdp, phi, 1e-11);
      worst = std::max(worst, report.deviation);
      argmax_ok = argmax_ok && report.argmax_preserved;
    }
    rows.push_back(bounded("oracle", "optimal Q shift (state potential)", instances, worst, 1e-9));
    CheckRow row{"oracle", "greedy argmax preservation", instances, argmax_ok ? 0.0 : 1.0, 0.0,
                 argmax_ok};
    rows.push_back(row);
  }

  {
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(49000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(5), 2 + rng.uniform_int(3));
      const Vec phi = oracle::random_state_potential(rng, mdp);
      std::vector<Vec> policies;
      for (int j = 0; j < 20; ++j) {
        policies.push_back(oracle::random_policy(rng, mdp.n_states, mdp.n_actions));
      }
      worst = std::max(worst, oracle::check_return_shift(mdp, phi, policies));
    }
    rows.push_back(bounded("oracle", "check_return_shift", instances, worst, 1e-9));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(53000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(3), 2 + rng.uniform_int(2));
      const Vec phi = oracle::random_state_action_potential(rng, mdp);
      const Vec theta = oracle::random_theta(rng, mdp.n_states, mdp.n_actions);
      worst = std::max(worst, oracle::check_unbiased_correction(mdp, phi, theta));
    }
    rows.push_back(bounded("oracle", "check_unbiased_correction", instances, worst, 1e-9));
  }

  {
    double worst = 0.0, control = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(57000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(5), 2 + rng.uniform_int(3));
      const Vec phi = oracle::random_state_action_potential(rng, mdp);
      const Vec theta = oracle::random_theta(rng, mdp.n_states, mdp.n_actions);
      worst = std::max(worst, oracle::check_lookback_zero_mean(mdp, phi, theta));
      if (k == 0) control = oracle::check_lookback_zero_mean(mdp, phi, theta, 1.0);
    }
    rows.push_back(bounded("oracle", "check_lookback_zero_mean", instances, worst, 1e-12));
    rows.push_back(exceeds("oracle", "lookback zero-mean negative control", 1, control, 1e-6));
  }

  {
    double generic_min = 1e300;
    double zero_control = 0.0, const_control = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(61000 + k);
      TabularMDP mdp = oracle::random_mdp(rng, 2, 2);
      const Vec theta = oracle::random_theta(rng, 2, 2);
      const Vec phi = oracle::random_state_action_potential(rng, mdp);
      generic_min = std::min(generic_min, oracle::check_reinforce_bias(mdp, phi, theta, 3));
      if (k == 0) {
        const Vec zero(phi.size(), 0.0);
        zero_control = oracle::check_reinforce_bias(mdp, zero, theta, 3);
        TabularMDP undiscounted = mdp;
        undiscounted.gamma = 1.0;
        const Vec constant(phi.size(), 1.7);
        const_control = oracle::check_reinforce_bias(undiscounted, constant, theta, 3);
      }
    }
    rows.push_back(exceeds("oracle", "reinforce bias gap (generic)", instances, generic_min,
                           1e-10));
    rows.push_back(bounded("oracle", "reinforce bias zero-potential control", 1, zero_control,
                           1e-12));
    rows.push_back(bounded("oracle", "reinforce bias constant-potential control (gamma=1)", 1,
                           const_control, 1e-12));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(65000 + k);
      const TabularMDP mdp = oracle::random_mdp(rng, 2 + rng.uniform_int(5), 2 + rng.uniform_int(3));
      const Vec q = oracle::value_iteration(mdp, 1e-12);
      const Vec greedy = oracle::greedy_policy(mdp, q);
      const auto pv = oracle::policy_q_values(mdp, greedy);
      for (int s = 0; s < mdp.n_states; ++s) {
        const double* row = q.data() + static_cast<std::size_t>(s) * mdp.n_actions;
        const double* qs = pv.Q.data() + static_cast<std::size_t>(s) * mdp.n_actions;
        int best = 0;
        for (int a = 1; a < mdp.n_actions; ++a) {
          if (row[a] > row[best]) best = a;
        }
        worst = std::max(worst, std::abs(row[best] - qs[best]));
      }
    }
    rows.push_back(bounded("oracle", "cross-oracle: VI vs greedy evaluation", instances, worst,
                           1e-8));
  }

  return rows;
}

std::vector<CheckRow> run_convergence_suite() {
  std::vector<CheckRow> rows;

  {
    double worst = 0.0;
    const int instances = 20;
    for (int k = 0; k < instances; ++k) {
      Rng rng(71000 + k);
      TabularMDP mdp = oracle::random_mdp(rng, 5, 2, 0.5, 0.8);
      for (double& r : mdp.R) r = rng.uniform(0.0, 0.3);
      const Vec pi = oracle::random_policy(rng, mdp.n_states, mdp.n_actions);
      // full-rank features with the columns bounded away from collinearity
      std::vector<Vec> features(mdp.n_states, Vec(2));
      while (true) {
        for (auto& f : features) {
          f[0] = rng.uniform(0.2, 1.0);
          f[1] = rng.uniform(-1.0, 1.0);
        }
        double d00 = 0.0, d01 = 0.0, d11 = 0.0;
        for (const auto& f : features) {
          d00 += f[0] * f[0];
          d01 += f[0] * f[1];
          d11 += f[1] * f[1];
        }
        if (std::abs(d01) / std::sqrt(d00 * d11) < 0.6) break;
      }
      const Vec star = oracle::exact_td_fixed_point(mdp, pi, features);
      Rng sim(81000 + k);
      const Vec landed = oracle::simulate_td0(mdp, pi, features, 8'000'000, sim);
      double err = 0.0;
      for (std::size_t j = 0; j < star.size(); ++j) {
        err = std::max(err, std::abs(star[j] - landed[j]));
      }
      worst = std::max(worst, err);
    }
    rows.push_back(bounded("convergence", "simulated TD(0) vs exact fixed point", instances,
                           worst, 1e-3));
  }

  {
    const int instances = 20;
    bool all_hold = true;
    double collapse = 0.0;
    double max_gap_violation = 0.0;
    int converged = 0;
    for (int k = 0; k < instances; ++k) {
      Rng rng(91000 + k);
      const bool single = k % 4 == 3;  // Corollary 1 instances
      const std::vector<int> acts = single ? std::vector<int>{2} : std::vector<int>{2, 2};
      const TabularGame game =
          oracle::random_game(rng, 3, acts, rng.uniform(0.6, 0.9), k % 2 == 0);
      oracle::GameAdvice advice;
      for (int i = 0; i < game.n_agents(); ++i) {
        Vec phi(static_cast<std::size_t>(game.n_states) * game.n_joint());
        for (double& v : phi) v = rng.uniform(-0.5, 0.5);
        advice.phi.push_back(std::move(phi));
      }
      const bool one_hot = k % 5 == 0;
      std::vector<std::vector<Vec>> features(game.n_agents());
      for (int i = 0; i < game.n_agents(); ++i) {
        features[i].assign(game.n_states, Vec(one_hot ? game.n_states : 1, 0.0));
        for (int s = 0; s < game.n_states; ++s) {
          if (one_hot) {
            features[i][s][s] = 1.0;
          } else {
            features[i][s][0] = 1.0;  // constant feature: crude critic
          }
        }
      }
      std::vector<Vec> thetas0;
      for (int i = 0; i < game.n_agents(); ++i) {
        thetas0.push_back(oracle::random_theta(rng, game.n_states, game.n_actions[i], 0.2));
      }
      const auto point = oracle::find_sam_ode_equilibrium(game, advice, features,
                                                          std::move(thetas0), 400000, 1e-10);
      if (point.residual > 1e-10) {
        all_hold = false;
        continue;
      }
      ++converged;
      const auto report = oracle::check_theorem3_bound(game, advice, features, point, 1e-8);
      if (!report.holds) all_hold = false;
      for (int i = 0; i < game.n_agents(); ++i) {
        max_gap_violation = std::max(max_gap_violation, report.lhs[i] - report.rhs[i]);
        if (one_hot) collapse = std::max({collapse, report.lhs[i], report.rhs[i]});
      }
    }
    CheckRow row{"convergence", "theorem-3 gradient bound at ODE equilibria", instances,
                 std::max(max_gap_violation, 0.0), 1e-9, all_hold && converged == instances};
    rows.push_back(row);
    rows.push_back(bounded("convergence", "theorem-3 one-hot control collapses", instances,
                           collapse, 1e-8));
  }

  return rows;
}

std::vector<CheckRow> run_gradient_suite() {
  std::vector<CheckRow> rows;

  {
    double worst = 0.0;
    const int instances = 20;
    for (int k = 0; k < instances; ++k) {
      Rng rng(101000 + k);
      TabularSoftmaxPolicy policy(6, 4);
      for (double& p : policy.params()) p = rng.uniform(-1.5, 1.5);
      const Obs obs{static_cast<double>(rng.uniform_int(6))};
      const Action act{static_cast<double>(rng.uniform_int(4))};
      const Vec grad = policy.grad_log_prob(obs, act);
      auto policy_copy = policy;
      const auto f = [&](const Vec& params) {
        policy_copy.params() = params;
        return policy_copy.log_prob(obs, act);
      };
      Rng probe(rng.next_u64());
      const auto report = finite_difference_check(f, policy.params(), grad, 1 << 20, 1e-5,
                                                  1e-6, probe);
      worst = std::max(worst, report.max_rel_error);
    }
    rows.push_back(bounded("gradients", "tabular log-prob vs central differences", instances,
                           worst, 1e-6));
  }

  {
    double worst = 0.0;
    const int instances = 100;
    for (int k = 0; k < instances; ++k) {
      Rng rng(105000 + k);
      TabularSoftmaxPolicy policy(4, 5);
      for (double& p : policy.params()) p = rng.uniform(-2.0, 2.0);
      const int s = rng.uniform_int(4);
      Vec sum(policy.param_count(), 0.0);
      const Vec probs = policy.probabilities(s);
      for (int a = 0; a < 5; ++a) {
        const Vec g = policy.grad_log_prob({static_cast<double>(s)},
                                           {static_cast<double>(a)});
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += probs[a] * g[j];
      }
      for (double v : sum) worst = std::max(worst, std::abs(v));
    }
    rows.push_back(bounded("gradients", "tabular score identity", instances, worst, 1e-12));
  }

  {
    double worst = 0.0;
    const int instances = 10;
    for (int k = 0; k < instances; ++k) {
      Rng rng(109000 + k);
      Rng init(rng.next_u64());
      GaussianMlpPolicy policy(3, 2, {8}, init);
      Obs obs{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      Action act{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Vec grad = policy.grad_log_prob(obs, act);
      auto copy = policy;
      const auto f = [&](const Vec& params) {
        copy.params() = params;
        return copy.log_prob(obs, act);
      };
      Rng probe(rng.next_u64());
      const auto report = finite_difference_check(f, policy.params(), grad, 1 << 20, 1e-5,
                                                  1e-4, probe);
      worst = std::max(worst, report.max_rel_error);
    }
    rows.push_back(bounded("gradients", "gaussian mlp log-prob vs central differences", instances,
                           worst, 1e-4));
  }

  {
    double worst = 0.0;
    const int instances = 10;
    for (int k = 0; k < instances; ++k) {
      Rng rng(113000 + k);
      Rng init(rng.next_u64());
      MlpValue value(3, {8}, init);
      Obs obs{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const auto [v, grad] = value.value_and_grad(obs);
      (void)v;
      auto copy = value;
      const auto f = [&](const Vec& params) {
        copy.params() = params;
        return copy.value(obs);
      };
      Rng probe(rng.next_u64());
      const auto report = finite_difference_check(f, value.params(), grad, 1 << 20, 1e-5,
                                                  1e-4, probe);
      worst = std::max(worst, report.max_rel_error);
    }
    rows.push_back(bounded("gradients", "mlp value vs central differences", instances, worst,
                           1e-4));
  }

  {
    // corrupting one gradient component must be caught
    Rng rng(117000);
    Rng init(rng.next_u64());
    GaussianMlpPolicy policy(2, 1, {6}, init);
    Obs obs{0.3, -0.7};
    Action act{0.4};
    Vec grad = policy.grad_log_prob(obs, act);
    int idx = 0;
    for (std::size_t j = 0; j < grad.size(); ++j) {
      if (std::abs(grad[j]) > std::abs(grad[idx])) idx = static_cast<int>(j);
    }
    grad[idx] *= 2.0;
    auto copy = policy;
    const auto f = [&](const Vec& params) {
      copy.params() = params;
      return copy.log_prob(obs, act);
    };
    Rng probe(rng.next_u64());
    const auto report =
        finite_difference_check(f, policy.params(), grad, 1 << 20, 1e-5, 1e-4, probe);
    CheckRow row{"gradients", "corrupted gradient negative control", 1, report.max_rel_error,
                 1e-4, !report.pass};
    rows.push_back(row);
  }

  return rows;
}

std::vector<CheckRow> run_verify(const std::string& which) {
  std::vector<CheckRow> rows;
  const auto append = [&rows](std::vector<CheckRow> more) {
    rows.insert(rows.end(), std::make_move_iterator(more.begin()),
                std::make_move_iterator(more.end()));
  };
  if (which == "all" || which == "advice") append(run_advice_suite());
  if (which == "all" || which == "oracle") {
    append(run_oracle_suite());
    append(run_convergence_suite());
  }
  if (which == "all" || which == "gradients") append(run_gradient_suite());
  if (rows.empty()) throw std::invalid_argument("unknown suite: " + which);
  return rows;
}

void print_rows(const std::vector<CheckRow>& rows, std::FILE* out) {
  std::fprintf(out, "%-12s %-52s %5s %12s %10s %s\n", "suite", "check", "n", "measured",
               "bound", "status");
  for (const auto& row : rows) {
    std::fprintf(out, "%-12s %-52s %5d %12.3e %10.1e %s\n", row.suite.c_str(), row.name.c_str(),
                 row.instances, row.deviation, row.tolerance, row.pass ? "pass" : "FAIL");
  }
}

bool all_pass(const std::vector<CheckRow>& rows) {
  for (const auto& row : rows) {
    if (!row.pass) return false;
  }
  return true;
}

}  // namespace shaping::verify
