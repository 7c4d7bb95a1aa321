#include "shaping/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shaping::oracle {

namespace {

constexpr double kPivotTol = 1e-12;

struct Chain {
  Vec P;  // [s][s']
  Vec r;  // [s]
};

Chain induced_chain(const TabularMDP& mdp, const Vec& pi) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Chain c;
  c.P.assign(static_cast<std::size_t>(S) * S, 0.0);
  c.r.assign(S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double w = pi[static_cast<std::size_t>(s) * A + a];
      c.r[s] += w * mdp.r(s, a);
      for (int s2 = 0; s2 < S; ++s2) {
        c.P[static_cast<std::size_t>(s) * S + s2] += w * mdp.p(s, a, s2);
      }
    }
  }
  return c;
}

Vec solve_V(const Chain& chain, double gamma, int S) {
  // (I - gamma P_pi) V = r_pi
  Vec a(static_cast<std::size_t>(S) * S);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      a[static_cast<std::size_t>(i) * S + j] =
          (i == j ? 1.0 : 0.0) - gamma * chain.P[static_cast<std::size_t>(i) * S + j];
    }
  }
  return solve_linear(std::move(a), chain.r, S);
}

Vec compose_Q(const TabularMDP& mdp, const Vec& V) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Vec q(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double ev = 0.0;
      for (int s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * V[s2];
      q[static_cast<std::size_t>(s) * A + a] = mdp.r(s, a) + mdp.gamma * ev;
    }
  }
  return q;
}

Vec stationary_of_chain(const Vec& P, int S) {
  // reducibility check: strong connectivity over positive-probability edges
  std::vector<bool> reach(static_cast<std::size_t>(S) * S, false);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      reach[static_cast<std::size_t>(i) * S + j] =
          (i == j) || P[static_cast<std::size_t>(i) * S + j] > 1e-15;
    }
  }
  for (int k = 0; k < S; ++k) {
    for (int i = 0; i < S; ++i) {
      if (!reach[static_cast<std::size_t>(i) * S + k]) continue;
      for (int j = 0; j < S; ++j) {
        if (reach[static_cast<std::size_t>(k) * S + j]) {
          reach[static_cast<std::size_t>(i) * S + j] = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < reach.size(); ++i) {
    if (!reach[i]) throw std::runtime_error("policy-induced chain is reducible");
  }
  // (P^T - I) mu = 0 with the last row replaced by the normalization
  Vec a(static_cast<std::size_t>(S) * S);
  Vec b(S, 0.0);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      a[static_cast<std::size_t>(i) * S + j] =
          P[static_cast<std::size_t>(j) * S + i] - (i == j ? 1.0 : 0.0);
    }
  }
  for (int j = 0; j < S; ++j) a[static_cast<std::size_t>(S - 1) * S + j] = 1.0;
  b[S - 1] = 1.0;
  return solve_linear(std::move(a), std::move(b), S);
}

double max_abs_diff(const Vec& x, const Vec& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace

Vec solve_linear(Vec a, Vec b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[static_cast<std::size_t>(row) * n + col]) >
          std::abs(a[static_cast<std::size_t>(pivot) * n + col])) {
        pivot = row;
      }
    }
    if (std::abs(a[static_cast<std::size_t>(pivot) * n + col]) < kPivotTol) {
      throw std::runtime_error("singular or rank-deficient linear system");
    }
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[static_cast<std::size_t>(col) * n + j],
                  a[static_cast<std::size_t>(pivot) * n + j]);
      }
      std::swap(b[col], b[pivot]);
    }
    const double d = a[static_cast<std::size_t>(col) * n + col];
    for (int row = col + 1; row < n; ++row) {
      const double f = a[static_cast<std::size_t>(row) * n + col] / d;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) {
        a[static_cast<std::size_t>(row) * n + j] -= f * a[static_cast<std::size_t>(col) * n + j];
      }
      b[row] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (int row = n - 1; row >= 0; --row) {
    double acc = b[row];
    for (int j = row + 1; j < n; ++j) acc -= a[static_cast<std::size_t>(row) * n + j] * x[j];
    x[row] = acc / a[static_cast<std::size_t>(row) * n + row];
  }
  return x;
}

void TabularMDP::validate() const {
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) sum += p(s, a, s2);
      if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("transition row does not sum to 1");
      }
      if (!std::isfinite(r(s, a))) throw std::invalid_argument("non-finite reward");
    }
  }
}

int TabularGame::n_joint() const {
  int n = 1;
  for (int a : n_actions) n *= a;
  return n;
}

int TabularGame::joint_index(std::span<const int> actions) const {
  int idx = 0;
  for (std::size_t i = 0; i < n_actions.size(); ++i) idx = idx * n_actions[i] + actions[i];
  return idx;
}

void TabularGame::decompose(int joint, std::span<int> actions) const {
  for (int i = n_agents() - 1; i >= 0; --i) {
    actions[i] = joint % n_actions[i];
    joint /= n_actions[i];
  }
}

TabularMDP ShapedModel::shaped(const Vec& pi) const {
  const int S = base.n_states, A = base.n_actions;
  TabularMDP out = base;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double exp_next = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        double phi_bar = 0.0;
        for (int a2 = 0; a2 < A; ++a2) {
          phi_bar += pi[static_cast<std::size_t>(s2) * A + a2] *
                     phi[static_cast<std::size_t>(s2) * A + a2];
        }
        exp_next += base.p(s, a, s2) * phi_bar;
      }
      out.R[static_cast<std::size_t>(s) * A + a] +=
          base.gamma * exp_next - phi[static_cast<std::size_t>(s) * A + a];
    }
  }
  return out;
}

TabularMDP ShapedModel::shaped_state_only(const Vec& phi_s) const {
  const int S = base.n_states, A = base.n_actions;
  TabularMDP out = base;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double exp_next = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_next += base.p(s, a, s2) * phi_s[s2];
      out.R[static_cast<std::size_t>(s) * A + a] += base.gamma * exp_next - phi_s[s];
    }
  }
  return out;
}

Vec value_iteration(const TabularMDP& mdp, double tol) {
  if (!(mdp.gamma < 1.0)) throw std::invalid_argument("value iteration requires gamma < 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const int S = mdp.n_states, A = mdp.n_actions;
  Vec q(static_cast<std::size_t>(S) * A, 0.0);
  Vec next(q.size());
  const double stop = mdp.gamma > 0.0 ? tol * (1.0 - mdp.gamma) / mdp.gamma : tol;
  for (long long iter = 0; iter < 10'000'000; ++iter) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          const double* row = q.data() + static_cast<std::size_t>(s2) * A;
          double best = row[0];
          for (int a2 = 1; a2 < A; ++a2) best = std::max(best, row[a2]);
          ev += mdp.p(s, a, s2) * best;
        }
        next[static_cast<std::size_t>(s) * A + a] = mdp.r(s, a) + mdp.gamma * ev;
      }
    }
    const double diff = max_abs_diff(q, next);
    q.swap(next);
    if (diff <= stop) return q;
  }
  throw std::runtime_error("value iteration failed to converge");
}

Vec greedy_policy(const TabularMDP& mdp, const Vec& q) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Vec pi(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s) {
    const double* row = q.data() + static_cast<std::size_t>(s) * A;
    int best = 0;
    for (int a = 1; a < A; ++a) {
      if (row[a] > row[best]) best = a;
    }
    pi[static_cast<std::size_t>(s) * A + best] = 1.0;
  }
  return pi;
}

PolicyValues policy_q_values(const TabularMDP& mdp, const Vec& pi) {
  if (!(mdp.gamma < 1.0)) throw std::invalid_argument("policy evaluation requires gamma < 1");
  const Chain chain = induced_chain(mdp, pi);
  PolicyValues pv;
  pv.V = solve_V(chain, mdp.gamma, mdp.n_states);
  pv.Q = compose_Q(mdp, pv.V);
  return pv;
}

Vec discounted_visitation(const TabularMDP& mdp, const Vec& pi) {
  const int S = mdp.n_states;
  const Chain chain = induced_chain(mdp, pi);
  // (I - gamma P_pi^T) d = rho0
  Vec a(static_cast<std::size_t>(S) * S);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      a[static_cast<std::size_t>(i) * S + j] =
          (i == j ? 1.0 : 0.0) - mdp.gamma * chain.P[static_cast<std::size_t>(j) * S + i];
    }
  }
  return solve_linear(std::move(a), mdp.rho0, S);
}

Vec stationary_distribution(const TabularMDP& mdp, const Vec& pi) {
  const Chain chain = induced_chain(mdp, pi);
  return stationary_of_chain(chain.P, mdp.n_states);
}

Vec softmax_policy(const Vec& theta, int n_states, int n_actions) {
  Vec pi(theta.size());
  for (int s = 0; s < n_states; ++s) {
    const double* row = theta.data() + static_cast<std::size_t>(s) * n_actions;
    double mx = row[0];
    for (int a = 1; a < n_actions; ++a) mx = std::max(mx, row[a]);
    double z = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      pi[static_cast<std::size_t>(s) * n_actions + a] = std::exp(row[a] - mx);
      z += pi[static_cast<std::size_t>(s) * n_actions + a];
    }
    for (int a = 0; a < n_actions; ++a) pi[static_cast<std::size_t>(s) * n_actions + a] /= z;
  }
  return pi;
}

double check_q_shift(const TabularMDP& mdp, const Vec& phi_sa, const Vec& pi) {
  const PolicyValues base = policy_q_values(mdp, pi);
  const ShapedModel model{mdp, phi_sa};
  const PolicyValues shaped = policy_q_values(model.shaped(pi), pi);
  double dev = 0.0;
  for (std::size_t i = 0; i < base.Q.size(); ++i) {
    dev = std::max(dev, std::abs(base.Q[i] - (shaped.Q[i] + phi_sa[i])));
  }
  return dev;
}

OptimalShiftReport check_q_shift_optimal(const TabularMDP& mdp, const Vec& phi_s, double vi_tol) {
  const int S = mdp.n_states, A = mdp.n_actions;
  const Vec q_base = value_iteration(mdp, vi_tol);
  const ShapedModel model{mdp, Vec(static_cast<std::size_t>(S) * A, 0.0)};
  const Vec q_shaped = value_iteration(model.shaped_state_only(phi_s), vi_tol);
  OptimalShiftReport report;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const std::size_t i = static_cast<std::size_t>(s) * A + a;
      report.deviation = std::max(report.deviation,
                                  std::abs(q_shaped[i] - (q_base[i] - phi_s[s])));
    }
  }
  report.argmax_preserved = true;
  const double margin = 100.0 * vi_tol;
  for (int s = 0; s < S; ++s) {
    const double* rb = q_base.data() + static_cast<std::size_t>(s) * A;
    const double* rs = q_shaped.data() + static_cast<std::size_t>(s) * A;
    double mb = rb[0], ms = rs[0];
    for (int a = 1; a < A; ++a) {
      mb = std::max(mb, rb[a]);
      ms = std::max(ms, rs[a]);
    }
    for (int a = 0; a < A; ++a) {
      const bool in_base = rb[a] >= mb - margin;
      const bool in_shaped = rs[a] >= ms - margin;
      if (in_base != in_shaped) report.argmax_preserved = false;
    }
  }
  return report;
}

double check_return_shift(const TabularMDP& mdp, const Vec& phi_s,
                          const std::vector<Vec>& policies) {
  const int S = mdp.n_states, A = mdp.n_actions;
  const ShapedModel model{mdp, Vec(static_cast<std::size_t>(S) * A, 0.0)};
  const TabularMDP shaped = model.shaped_state_only(phi_s);
  double expected_phi0 = 0.0;
  for (int s = 0; s < S; ++s) expected_phi0 += mdp.rho0[s] * phi_s[s];
  double dev = 0.0;
  for (const Vec& pi : policies) {
    const PolicyValues base = policy_q_values(mdp, pi);
    const PolicyValues sh = policy_q_values(shaped, pi);
    double j_base = 0.0, j_shaped = 0.0;
    for (int s = 0; s < S; ++s) {
      j_base += mdp.rho0[s] * base.V[s];
      j_shaped += mdp.rho0[s] * sh.V[s];
    }
    dev = std::max(dev, std::abs(j_shaped - (j_base - expected_phi0)));
  }
  return dev;
}

double check_unbiased_correction(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta) {
  const int S = mdp.n_states, A = mdp.n_actions;
  const Vec pi = softmax_policy(theta, S, A);
  const PolicyValues base = policy_q_values(mdp, pi);
  const ShapedModel model{mdp, phi_sa};
  const PolicyValues shaped = policy_q_values(model.shaped(pi), pi);
  const Vec d = discounted_visitation(mdp, pi);

  Vec g_plain(theta.size(), 0.0);
  Vec g_shaped(theta.size(), 0.0);
  for (int s = 0; s < S; ++s) {
    double v_shaped = 0.0;
    for (int a = 0; a < A; ++a) {
      v_shaped += pi[static_cast<std::size_t>(s) * A + a] *
                  shaped.Q[static_cast<std::size_t>(s) * A + a];
    }
    for (int a = 0; a < A; ++a) {
      const std::size_t sa = static_cast<std::size_t>(s) * A + a;
      const double pa = pi[sa];
      const double weight_shaped = shaped.Q[sa] - v_shaped + phi_sa[sa];
      for (int a2 = 0; a2 < A; ++a2) {
        const std::size_t sa2 = static_cast<std::size_t>(s) * A + a2;
        const double dpi = pa * ((a2 == a ? 1.0 : 0.0) - pi[sa2]);  // dpi(a|s)/dtheta[s,a2]
        g_plain[sa2] += d[s] * dpi * base.Q[sa];
        g_shaped[sa2] += d[s] * pa * weight_shaped * ((a2 == a ? 1.0 : 0.0) - pi[sa2]);
      }
    }
  }
  return max_abs_diff(g_plain, g_shaped);
}

double check_lookback_zero_mean(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta,
                                double score_offset) {
  const int S = mdp.n_states, A = mdp.n_actions;
  const Vec pi = softmax_policy(theta, S, A);
  const Vec mu = stationary_distribution(mdp, pi);

  // f(s) = E[phi(s_prev, a_prev) | s_t = s] under stationarity
  Vec f(S, 0.0);
  for (int s = 0; s < S; ++s) {
    double mass = 0.0, acc = 0.0;
    for (int sp = 0; sp < S; ++sp) {
      for (int ap = 0; ap < A; ++ap) {
        const double w = mu[sp] * pi[static_cast<std::size_t>(sp) * A + ap] * mdp.p(sp, ap, s);
        mass += w;
        acc += w * phi_sa[static_cast<std::size_t>(sp) * A + ap];
      }
    }
    f[s] = mass > 0.0 ? acc / mass : 0.0;
  }

  Vec g(theta.size(), 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double w = mu[s] * pi[static_cast<std::size_t>(s) * A + a] * f[s];
      for (int a2 = 0; a2 < A; ++a2) {
        const double score =
            (a2 == a ? 1.0 : 0.0) - pi[static_cast<std::size_t>(s) * A + a2] + score_offset;
        g[static_cast<std::size_t>(s) * A + a2] += w * score;
      }
    }
  }
  double norm = 0.0;
  for (double v : g) norm = std::max(norm, std::abs(v));
  return norm;
}

namespace {

struct BiasAccumulator {
  const TabularMDP& mdp;
  const Vec& pi;
  const Vec& phi;
  int T;
  Vec g_plain, g_shaped;
  std::vector<int> states, actions;

  void run() {
    const int S = mdp.n_states;
    g_plain.assign(pi.size(), 0.0);
    g_shaped.assign(pi.size(), 0.0);
    states.assign(T + 1, 0);
    actions.assign(T + 1, 0);
    for (int s0 = 0; s0 < S; ++s0) {
      if (mdp.rho0[s0] > 0.0) {
        states[0] = s0;
        descend(0, mdp.rho0[s0]);
      }
    }
  }

  void descend(int t, double prob) {
    const int A = mdp.n_actions, S = mdp.n_states;
    for (int a = 0; a < A; ++a) {
      const double pa = pi[static_cast<std::size_t>(states[t]) * A + a];
      if (pa == 0.0) continue;
      actions[t] = a;
      if (t == T) {
        finish(prob * pa);
        continue;
      }
      for (int s2 = 0; s2 < S; ++s2) {
        const double pt = mdp.p(states[t], a, s2);
        if (pt == 0.0) continue;
        states[t + 1] = s2;
        descend(t + 1, prob * pa * pt);
      }
    }
  }

  void finish(double prob) {
    const int A = mdp.n_actions;
    const double phi_T = phi[static_cast<std::size_t>(states[T]) * A + actions[T]];
    // suffix returns G(t) = sum_{i=t..T} gamma^{i-t} r_i
    Vec G(T + 1, 0.0);
    G[T] = mdp.r(states[T], actions[T]);
    for (int t = T - 1; t >= 0; --t) {
      G[t] = mdp.r(states[t], actions[t]) + mdp.gamma * G[t + 1];
    }
    double disc_t = 1.0;
    for (int t = 0; t <= T; ++t) {
      const std::size_t sa = static_cast<std::size_t>(states[t]) * A + actions[t];
      const double ga =
          G[t] + std::pow(mdp.gamma, T - t) * phi_T - phi[sa];
      for (int a2 = 0; a2 < A; ++a2) {
        const std::size_t idx = static_cast<std::size_t>(states[t]) * A + a2;
        const double score =
            (a2 == actions[t] ? 1.0 : 0.0) - pi[idx];
        g_plain[idx] += prob * disc_t * G[t] * score;
        g_shaped[idx] += prob * disc_t * ga * score;
      }
      disc_t *= mdp.gamma;
    }
  }
};

}  // namespace

double check_reinforce_bias(const TabularMDP& mdp, const Vec& phi_sa, const Vec& theta, int T) {
  double leaves = mdp.n_states;
  for (int t = 0; t <= T; ++t) leaves *= mdp.n_actions * mdp.n_states;
  if (leaves > 2e6) throw std::invalid_argument("enumeration horizon too large");
  const Vec pi = softmax_policy(theta, mdp.n_states, mdp.n_actions);
  BiasAccumulator acc{mdp, pi, phi_sa, T, {}, {}, {}, {}};
  acc.run();
  double gap = 0.0;
  for (std::size_t i = 0; i < acc.g_plain.size(); ++i) {
    gap = std::max(gap, std::abs(acc.g_plain[i] - acc.g_shaped[i]));
  }
  return gap;
}

Vec td_fixed_point_core(const Vec& P_pi, const Vec& r_pi, const Vec& weights, double gamma,
                        const std::vector<Vec>& features, int n_states) {
  const int k = static_cast<int>(features.front().size());
  Vec a(static_cast<std::size_t>(k) * k, 0.0);
  Vec b(k, 0.0);
  for (int s = 0; s < n_states; ++s) {
    Vec expected_next(k, 0.0);
    for (int s2 = 0; s2 < n_states; ++s2) {
      const double p = P_pi[static_cast<std::size_t>(s) * n_states + s2];
      if (p == 0.0) continue;
      for (int j = 0; j < k; ++j) expected_next[j] += p * features[s2][j];
    }
    for (int i = 0; i < k; ++i) {
      const double wf = weights[s] * features[s][i];
      b[i] += wf * r_pi[s];
      for (int j = 0; j < k; ++j) {
        a[static_cast<std::size_t>(i) * k + j] +=
            wf * (features[s][j] - gamma * expected_next[j]);
      }
    }
  }
  try {
    return solve_linear(std::move(a), std::move(b), k);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("rank-deficient features in TD fixed point");
  }
}

Vec exact_td_fixed_point(const TabularMDP& mdp, const Vec& pi, const std::vector<Vec>& features) {
  if (static_cast<int>(features.size()) != mdp.n_states) {
    throw std::invalid_argument("one feature row per state required");
  }
  const Chain chain = induced_chain(mdp, pi);
  const Vec mu = stationary_of_chain(chain.P, mdp.n_states);
  return td_fixed_point_core(chain.P, chain.r, mu, mdp.gamma, features, mdp.n_states);
}

Vec simulate_td0(const TabularMDP& mdp, const Vec& pi, const std::vector<Vec>& features,
                 long long steps, Rng& rng) {
  const int S = mdp.n_states, A = mdp.n_actions;
  const int k = static_cast<int>(features.front().size());
  Vec omega(k, 0.0);
  Vec tail_sum(k, 0.0);
  long long tail_count = 0;
  const long long tail_start = steps / 2;

  auto sample_categorical = [&](const double* w, int n) {
    const double u = rng.uniform();
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      c += w[i];
      if (u < c) return i;
    }
    return n - 1;
  };

  int s = sample_categorical(mdp.rho0.data(), S);
  for (long long t = 0; t < steps; ++t) {
    const int a = sample_categorical(pi.data() + static_cast<std::size_t>(s) * A, A);
    const int s2 = sample_categorical(
        mdp.P.data() + (static_cast<std::size_t>(s) * A + a) * S, S);
    double v = 0.0, v2 = 0.0;
    for (int j = 0; j < k; ++j) {
      v += features[s][j] * omega[j];
      v2 += features[s2][j] * omega[j];
    }
    const double delta = mdp.r(s, a) + mdp.gamma * v2 - v;
    // Robbins-Monro decay; the tail average does the final denoising
    const double alpha = 0.2 / std::pow(1.0 + static_cast<double>(t) / 20000.0, 0.8);
    for (int j = 0; j < k; ++j) omega[j] += alpha * delta * features[s][j];
    if (t >= tail_start) {
      for (int j = 0; j < k; ++j) tail_sum[j] += omega[j];
      ++tail_count;
    }
    s = s2;
  }
  for (int j = 0; j < k; ++j) tail_sum[j] /= static_cast<double>(tail_count);
  return tail_sum;
}

// -- games -------------------------------------------------------------------

namespace {

struct GameEval {
  Vec joint_pi;       // [s][ja]
  Vec P_pi;           // [s][s']
  Vec mu;             // stationary
  std::vector<Vec> pi_i;  // per agent [s][a_i]
};

GameEval evaluate_game_policy(const TabularGame& g, const std::vector<Vec>& thetas) {
  const int S = g.n_states, J = g.n_joint(), N = g.n_agents();
  GameEval ev;
  ev.pi_i.resize(N);
  for (int i = 0; i < N; ++i) ev.pi_i[i] = softmax_policy(thetas[i], S, g.n_actions[i]);
  ev.joint_pi.assign(static_cast<std::size_t>(S) * J, 0.0);
  std::vector<int> acts(N);
  for (int s = 0; s < S; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      g.decompose(ja, acts);
      double p = 1.0;
      for (int i = 0; i < N; ++i) {
        p *= ev.pi_i[i][static_cast<std::size_t>(s) * g.n_actions[i] + acts[i]];
      }
      ev.joint_pi[static_cast<std::size_t>(s) * J + ja] = p;
    }
  }
  ev.P_pi.assign(static_cast<std::size_t>(S) * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      const double w = ev.joint_pi[static_cast<std::size_t>(s) * J + ja];
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < S; ++s2) {
        ev.P_pi[static_cast<std::size_t>(s) * S + s2] += w * g.p(s, ja, s2);
      }
    }
  }
  ev.mu = stationary_of_chain(ev.P_pi, S);
  return ev;
}

/// Shaped per-agent rewards R_i + expected look-ahead advice under pi.
Vec expected_lookahead_advice(const TabularGame& g, const GameEval& ev, const Vec& phi_i, int) {
  const int S = g.n_states, J = g.n_joint();
  Vec out(static_cast<std::size_t>(S) * J);
  Vec phi_bar(S, 0.0);
  for (int s2 = 0; s2 < S; ++s2) {
    double acc = 0.0;
    for (int ja2 = 0; ja2 < J; ++ja2) {
      acc += ev.joint_pi[static_cast<std::size_t>(s2) * J + ja2] *
             phi_i[static_cast<std::size_t>(s2) * J + ja2];
    }
    phi_bar[s2] = acc;
  }
  for (int s = 0; s < S; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      double exp_next = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_next += g.p(s, ja, s2) * phi_bar[s2];
      out[static_cast<std::size_t>(s) * J + ja] = g.gamma * exp_next -
                                                  phi_i[static_cast<std::size_t>(s) * J + ja];
    }
  }
  return out;
}

Vec average_reward(const TabularGame& g, const GameEval& ev, const Vec& r_sja) {
  const int S = g.n_states, J = g.n_joint();
  Vec r(S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      r[s] += ev.joint_pi[static_cast<std::size_t>(s) * J + ja] *
              r_sja[static_cast<std::size_t>(s) * J + ja];
    }
  }
  return r;
}

Vec solve_game_V(const TabularGame& g, const GameEval& ev, const Vec& r_pi) {
  const int S = g.n_states;
  Vec a(static_cast<std::size_t>(S) * S);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      a[static_cast<std::size_t>(i) * S + j] =
          (i == j ? 1.0 : 0.0) - g.gamma * ev.P_pi[static_cast<std::size_t>(i) * S + j];
    }
  }
  return solve_linear(std::move(a), r_pi, S);
}

/// Actor vector field for agent i at the exact critic fixed point.
Vec actor_field(const TabularGame& g, const GameEval& ev, const Vec& advice_r,
                const Vec& phi_i, const Vec& v_omega, int agent) {
  const int S = g.n_states, J = g.n_joint(), Ai = g.n_actions[agent];
  const int N = g.n_agents();
  Vec h(static_cast<std::size_t>(S) * Ai, 0.0);
  std::vector<int> acts(N);
  for (int s = 0; s < S; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      const double w = ev.mu[s] * ev.joint_pi[static_cast<std::size_t>(s) * J + ja];
      if (w == 0.0) continue;
      g.decompose(ja, acts);
      const std::size_t sja = static_cast<std::size_t>(s) * J + ja;
      double exp_next = 0.0;
      for (int s2 = 0; s2 < S; ++s2) exp_next += g.p(s, ja, s2) * v_omega[s2];
      // shaped TD error plus the look-ahead actor correction
      const double dtilde =
          g.R[agent][sja] + advice_r[sja] + g.gamma * exp_next - v_omega[s] + phi_i[sja];
      for (int a2 = 0; a2 < Ai; ++a2) {
        const double score = (a2 == acts[agent] ? 1.0 : 0.0) -
                             ev.pi_i[agent][static_cast<std::size_t>(s) * Ai + a2];
        h[static_cast<std::size_t>(s) * Ai + a2] += w * dtilde * score;
      }
    }
  }
  return h;
}

}  // namespace

namespace {

struct FieldEval {
  std::vector<Vec> fields;
  double norm_inf = 0.0;
  double norm2 = 0.0;
};

FieldEval eval_actor_fields(const TabularGame& game, const GameAdvice& advice,
                            const std::vector<std::vector<Vec>>& features, SamOdePoint& point) {
  const int N = game.n_agents(), S = game.n_states;
  const GameEval ev = evaluate_game_policy(game, point.thetas);
  FieldEval out;
  out.fields.resize(N);
  for (int i = 0; i < N; ++i) {
    const Vec advice_r = expected_lookahead_advice(game, ev, advice.phi[i], i);
    Vec total_r(advice_r.size());
    for (std::size_t k = 0; k < advice_r.size(); ++k) total_r[k] = game.R[i][k] + advice_r[k];
    point.omegas[i] = td_fixed_point_core(ev.P_pi, average_reward(game, ev, total_r), ev.mu,
                                          game.gamma, features[i], S);
    Vec v_omega(S, 0.0);
    for (int s = 0; s < S; ++s) {
      for (std::size_t j = 0; j < point.omegas[i].size(); ++j) {
        v_omega[s] += features[i][s][j] * point.omegas[i][j];
      }
    }
    out.fields[i] = actor_field(game, ev, advice_r, advice.phi[i], v_omega, i);
    for (double v : out.fields[i]) {
      out.norm_inf = std::max(out.norm_inf, std::abs(v));
      out.norm2 += v * v;
    }
  }
  out.norm2 = std::sqrt(out.norm2);
  point.residual = out.norm_inf;
  return out;
}

void step_thetas(SamOdePoint& point, const FieldEval& ev, double multiplier) {
  for (std::size_t i = 0; i < point.thetas.size(); ++i) {
    for (std::size_t j = 0; j < point.thetas[i].size(); ++j) {
      point.thetas[i][j] += multiplier * ev.fields[i][j];
    }
  }
}

}  // namespace

SamOdePoint find_sam_ode_equilibrium(const TabularGame& game, const GameAdvice& advice,
                                     const std::vector<std::vector<Vec>>& features,
                                     std::vector<Vec> thetas0, long long max_iters, double tol) {
  SamOdePoint point;
  point.thetas = std::move(thetas0);
  point.omegas.resize(game.n_agents());
  // Saturating softmax equilibria sit at the end of long flat plateaus where
  // the field decays exponentially; interior equilibria need plain Euler
  // contraction. Alternate fixed-arc-length traversal with adaptive Euler.
  long long used = 0;
  while (used < max_iters) {
    const long long plateau_budget = std::min<long long>(4000, max_iters - used);
    for (long long k = 0; k < plateau_budget; ++k, ++used) {
      const FieldEval ev = eval_actor_fields(game, advice, features, point);
      if (ev.norm_inf <= tol) return point;
      step_thetas(point, ev, 0.05 / ev.norm2);
    }
    double dt = 0.5;
    double prev = -1.0;
    const long long settle_budget = std::min<long long>(20000, max_iters - used);
    for (long long k = 0; k < settle_budget; ++k, ++used) {
      const FieldEval ev = eval_actor_fields(game, advice, features, point);
      if (ev.norm_inf <= tol) return point;
      if (prev >= 0.0 && ev.norm2 > prev) {
        dt = std::max(dt * 0.5, 1e-4);
      } else {
        dt = std::min(dt * 1.05, 2.0);
      }
      prev = ev.norm2;
      step_thetas(point, ev, dt);
    }
  }
  eval_actor_fields(game, advice, features, point);
  return point;
}

Theorem3Report check_theorem3_bound(const TabularGame& game, const GameAdvice& advice,
                                    const std::vector<std::vector<Vec>>& features,
                                    const SamOdePoint& point, double residual_tol,
                                    double slack) {
  const int N = game.n_agents(), S = game.n_states, J = game.n_joint();
  const GameEval ev = evaluate_game_policy(game, point.thetas);
  Theorem3Report report;
  report.lhs.resize(N);
  report.rhs.resize(N);
  std::vector<int> acts(N);

  // stationarity of the supplied point is recomputed, not trusted
  for (int i = 0; i < N; ++i) {
    const Vec advice_r = expected_lookahead_advice(game, ev, advice.phi[i], i);
    Vec v_omega(S, 0.0);
    for (int s = 0; s < S; ++s) {
      for (std::size_t j = 0; j < point.omegas[i].size(); ++j) {
        v_omega[s] += features[i][s][j] * point.omegas[i][j];
      }
    }
    const Vec h = actor_field(game, ev, advice_r, advice.phi[i], v_omega, i);
    for (double v : h) {
      if (std::abs(v) > residual_tol) {
        throw std::invalid_argument("theorem-3 check requires a stationary point");
      }
    }

    // lhs: exact policy gradient for agent i in the original game
    const Vec r_pi = average_reward(game, ev, game.R[i]);
    const Vec V_orig = solve_game_V(game, ev, r_pi);
    const int Ai = game.n_actions[i];
    Vec grad(static_cast<std::size_t>(S) * Ai, 0.0);
    for (int s = 0; s < S; ++s) {
      for (int ja = 0; ja < J; ++ja) {
        const double w = ev.mu[s] * ev.joint_pi[static_cast<std::size_t>(s) * J + ja];
        if (w == 0.0) continue;
        game.decompose(ja, acts);
        double exp_next = 0.0;
        for (int s2 = 0; s2 < S; ++s2) exp_next += game.p(s, ja, s2) * V_orig[s2];
        const double q = game.R[i][static_cast<std::size_t>(s) * J + ja] + game.gamma * exp_next;
        for (int a2 = 0; a2 < Ai; ++a2) {
          const double score = (a2 == acts[i] ? 1.0 : 0.0) -
                               ev.pi_i[i][static_cast<std::size_t>(s) * Ai + a2];
          grad[static_cast<std::size_t>(s) * Ai + a2] += w * q * score;
        }
      }
    }
    double lhs = 0.0;
    for (double v : grad) lhs += v * v;
    report.lhs[i] = std::sqrt(lhs);

    // rhs: C_i * E_i with stationary-weighted norms; the critic target is
    // the true value of the shaped game
    Vec total_r(advice_r.size());
    for (std::size_t k = 0; k < advice_r.size(); ++k) {
      total_r[k] = game.R[i][k] + advice_r[k];
    }
    const Vec V_shaped = solve_game_V(game, ev, average_reward(game, ev, total_r));
    double err2 = 0.0;
    for (int s = 0; s < S; ++s) {
      const double diff = V_shaped[s] - v_omega[s];
      err2 += ev.mu[s] * diff * diff;
    }
    double c2 = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < Ai; ++a) {
        const double pa = ev.pi_i[i][static_cast<std::size_t>(s) * Ai + a];
        double norm = 0.0;
        for (int a2 = 0; a2 < Ai; ++a2) {
          const double score = (a2 == a ? 1.0 : 0.0) -
                               ev.pi_i[i][static_cast<std::size_t>(s) * Ai + a2];
          norm += score * score;
        }
        c2 += ev.mu[s] * pa * norm;
      }
    }
    report.rhs[i] = std::sqrt(c2) * (game.gamma + 1.0) * std::sqrt(err2);
  }
  report.holds = true;
  for (int i = 0; i < N; ++i) {
    if (report.lhs[i] > report.rhs[i] + slack) report.holds = false;
  }
  return report;
}

// -- random instances ---------------------------------------------------

TabularMDP random_mdp(Rng& rng, int n_states, int n_actions, double gamma_lo, double gamma_hi) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = rng.uniform(gamma_lo, gamma_hi);
  mdp.P.resize(static_cast<std::size_t>(n_states) * n_actions * n_states);
  mdp.R.resize(static_cast<std::size_t>(n_states) * n_actions);
  mdp.rho0.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      const std::size_t base = (static_cast<std::size_t>(s) * n_actions + a) * n_states;
      for (int s2 = 0; s2 < n_states; ++s2) {
        // strictly positive entries keep every induced chain ergodic
        mdp.P[base + s2] = 0.1 + rng.uniform();
        sum += mdp.P[base + s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) mdp.P[base + s2] /= sum;
      mdp.R[static_cast<std::size_t>(s) * n_actions + a] = rng.uniform(-1.0, 1.0);
    }
  }
  double sum = 0.0;
  for (int s = 0; s < n_states; ++s) {
    mdp.rho0[s] = 0.1 + rng.uniform();
    sum += mdp.rho0[s];
  }
  for (double& v : mdp.rho0) v /= sum;
  return mdp;
}

Vec random_state_action_potential(Rng& rng, const TabularMDP& mdp, double scale) {
  Vec phi(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
  for (double& v : phi) v = rng.uniform(-scale, scale);
  return phi;
}

Vec random_state_potential(Rng& rng, const TabularMDP& mdp, double scale) {
  Vec phi(mdp.n_states);
  for (double& v : phi) v = rng.uniform(-scale, scale);
  return phi;
}

Vec random_policy(Rng& rng, int n_states, int n_actions) {
  Vec pi(static_cast<std::size_t>(n_states) * n_actions);
  for (int s = 0; s < n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      pi[static_cast<std::size_t>(s) * n_actions + a] = 0.05 + rng.uniform();
      sum += pi[static_cast<std::size_t>(s) * n_actions + a];
    }
    for (int a = 0; a < n_actions; ++a) pi[static_cast<std::size_t>(s) * n_actions + a] /= sum;
  }
  return pi;
}

Vec random_theta(Rng& rng, int n_states, int n_actions, double scale) {
  Vec theta(static_cast<std::size_t>(n_states) * n_actions);
  for (double& v : theta) v = rng.uniform(-scale, scale);
  return theta;
}

TabularGame random_game(Rng& rng, int n_states, const std::vector<int>& n_actions,
                        double gamma, bool identical_interest) {
  TabularGame g;
  g.n_states = n_states;
  g.n_actions = n_actions;
  g.gamma = gamma;
  const int J = g.n_joint();
  g.P.resize(static_cast<std::size_t>(n_states) * J * n_states);
  g.R.resize(g.n_agents());
  g.rho0.assign(n_states, 1.0 / n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int ja = 0; ja < J; ++ja) {
      const std::size_t base = (static_cast<std::size_t>(s) * J + ja) * n_states;
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        g.P[base + s2] = 0.1 + rng.uniform();
        sum += g.P[base + s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) g.P[base + s2] /= sum;
    }
  }
  for (int i = 0; i < g.n_agents(); ++i) {
    g.R[i].resize(static_cast<std::size_t>(n_states) * J);
    if (identical_interest && i > 0) {
      g.R[i] = g.R[0];
      continue;
    }
    for (double& v : g.R[i]) v = rng.uniform(0.0, 1.0);
  }
  return g;
}

}  // namespace shaping::oracle
