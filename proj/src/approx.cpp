#include "shaping/approx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace shaping {

namespace {

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

void check_finite(double x, const char* where) {
  if (!std::isfinite(x)) {
    throw std::runtime_error(std::string("non-finite update direction in ") + where);
  }
}

}  // namespace

// -- TabularSoftmaxPolicy ----------------------------------------------------

TabularSoftmaxPolicy::TabularSoftmaxPolicy(int n_observations, int n_actions)
    : n_obs_(n_observations), n_actions_(n_actions),
      theta_(static_cast<std::size_t>(n_observations) * n_actions, 0.0) {
  if (n_observations <= 0 || n_actions <= 0) {
    throw std::invalid_argument("tabular policy needs positive table dimensions");
  }
}

int TabularSoftmaxPolicy::obs_id(const Obs& obs) const {
  if (obs.size() != 1) {
    throw std::invalid_argument("tabular policy expects a single observation id");
  }
  const int id = static_cast<int>(std::llround(obs[0]));
  if (id < 0 || id >= n_obs_) throw std::out_of_range("observation id out of range");
  return id;
}

Vec TabularSoftmaxPolicy::probabilities(int id) const {
  const double* row = theta_.data() + static_cast<std::size_t>(id) * n_actions_;
  double mx = row[0];
  for (int a = 1; a < n_actions_; ++a) mx = std::max(mx, row[a]);
  Vec p(n_actions_);
  double z = 0.0;
  for (int a = 0; a < n_actions_; ++a) {
    p[a] = std::exp(row[a] - mx);
    z += p[a];
  }
  for (double& v : p) v /= z;
  return p;
}

Action TabularSoftmaxPolicy::sample(const Obs& obs, Rng& rng) const {
  const Vec p = probabilities(obs_id(obs));
  const double u = rng.uniform();
  double c = 0.0;
  for (int a = 0; a < n_actions_; ++a) {
    c += p[a];
    if (u < c) return {static_cast<double>(a)};
  }
  return {static_cast<double>(n_actions_ - 1)};
}

double TabularSoftmaxPolicy::log_prob(const Obs& obs, const Action& action) const {
  const int id = obs_id(obs);
  const int a = static_cast<int>(std::llround(action.at(0)));
  if (a < 0 || a >= n_actions_) throw std::out_of_range("action id out of range");
  const Vec p = probabilities(id);
  if (p[a] <= 0.0) throw std::domain_error("zero-density action has no score");
  return std::log(p[a]);
}

Vec TabularSoftmaxPolicy::grad_log_prob(const Obs& obs, const Action& action) const {
  const int id = obs_id(obs);
  const int a = static_cast<int>(std::llround(action.at(0)));
  if (a < 0 || a >= n_actions_) throw std::out_of_range("action id out of range");
  const Vec p = probabilities(id);
  Vec g(theta_.size(), 0.0);
  double* row = g.data() + static_cast<std::size_t>(id) * n_actions_;
  for (int b = 0; b < n_actions_; ++b) row[b] = (b == a ? 1.0 : 0.0) - p[b];
  return g;
}

std::unique_ptr<Policy> TabularSoftmaxPolicy::clone() const {
  return std::make_unique<TabularSoftmaxPolicy>(*this);
}

// -- LinearValue ---------------------------------------------------------

LinearValue::LinearValue(FeatureMap features, int n_features)
    : features_(std::move(features)), omega_(n_features, 0.0) {
  if (n_features <= 0) throw std::invalid_argument("linear value needs features");
}

double LinearValue::value(const Obs& input) const {
  const Vec phi = features_(input);
  if (phi.size() != omega_.size()) {
    throw std::invalid_argument("feature vector does not match parameter count");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * omega_[i];
  return v;
}

std::pair<double, Vec> LinearValue::value_and_grad(const Obs& input) const {
  Vec phi = features_(input);
  if (phi.size() != omega_.size()) {
    throw std::invalid_argument("feature vector does not match parameter count");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * omega_[i];
  return {v, std::move(phi)};
}

std::unique_ptr<ValueFunction> LinearValue::clone() const {
  return std::make_unique<LinearValue>(*this);
}

FeatureMap one_hot_features(int n) {
  return [n](const Obs& obs) {
    Vec phi(n, 0.0);
    const int id = static_cast<int>(std::llround(obs.at(0)));
    if (id < 0 || id >= n) throw std::out_of_range("observation id out of range");
    phi[id] = 1.0;
    return phi;
  };
}

FeatureMap identity_bias_features(int input_dim) {
  return [input_dim](const Obs& obs) {
    if (static_cast<int>(obs.size()) != input_dim) {
      throw std::invalid_argument("observation size does not match feature map");
    }
    Vec phi(obs);
    phi.push_back(1.0);
    return phi;
  };
}

// -- Mlp -----------------------------------------------------------------

Mlp::Mlp(std::vector<int> layer_sizes) : sizes(std::move(layer_sizes)) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp needs input and output layers");
  params.assign(param_count(), 0.0);
}

int Mlp::param_count() const {
  int n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * (sizes[l] + 1);
  return n;
}

void Mlp::init_xavier(Rng& rng) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) params[off + i] = rng.uniform(-bound, bound);
    off += static_cast<std::size_t>(fan_out) * fan_in;
    for (int i = 0; i < fan_out; ++i) params[off + i] = 0.0;
    off += fan_out;
  }
}

Vec Mlp::forward(const Obs& input, Workspace* ws) const {
  if (static_cast<int>(input.size()) != sizes.front()) {
    throw std::invalid_argument("mlp input size mismatch");
  }
  const std::size_t n_layers = sizes.size() - 1;
  Vec cur(input.begin(), input.end());
  if (ws) {
    ws->act.assign(sizes.size(), {});
    ws->act[0] = cur;
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    Vec next(out);
    const double* W = params.data() + off;
    const double* b = params.data() + off + static_cast<std::size_t>(out) * in;
    for (int i = 0; i < out; ++i) {
      double z = b[i];
      const double* wr = W + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) z += wr[j] * cur[j];
      next[i] = (l + 1 < n_layers) ? std::tanh(z) : z;
    }
    off += static_cast<std::size_t>(out) * (in + 1);
    cur = std::move(next);
    if (ws) ws->act[l + 1] = cur;
  }
  return cur;
}

Vec Mlp::backward(const Workspace& ws, const Vec& dout) const {
  const std::size_t n_layers = sizes.size() - 1;
  if (ws.act.size() != sizes.size()) throw std::logic_error("workspace not from this net");
  Vec dparams(params.size(), 0.0);
  Vec g = dout;  // gradient w.r.t. the current layer's post-activation
  std::size_t off = params.size();
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = sizes[l], out = sizes[l + 1];
    off -= static_cast<std::size_t>(out) * (in + 1);
    // hidden layers carry a tanh; the output layer is linear
    if (l + 1 < n_layers) {
      for (int i = 0; i < out; ++i) g[i] *= 1.0 - ws.act[l + 1][i] * ws.act[l + 1][i];
    }
    const double* W = params.data() + off;
    double* dW = dparams.data() + off;
    double* db = dparams.data() + off + static_cast<std::size_t>(out) * in;
    const Vec& below = ws.act[l];
    for (int i = 0; i < out; ++i) {
      const double gi = g[i];
      double* dwr = dW + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) dwr[j] = gi * below[j];
      db[i] = gi;
    }
    if (l > 0) {
      Vec gprev(in, 0.0);
      for (int i = 0; i < out; ++i) {
        const double gi = g[i];
        const double* wr = W + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) gprev[j] += wr[j] * gi;
      }
      g = std::move(gprev);
    }
  }
  return dparams;
}

// -- GaussianMlpPolicy -----------------------------------------------------

GaussianMlpPolicy::GaussianMlpPolicy(int obs_dim, int action_dim,
                                     const std::vector<int>& hidden, Rng& init_rng,
                                     double variance_floor)
    : action_dim_(action_dim), variance_floor_(variance_floor), net_([&] {
        std::vector<int> sizes{obs_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(2 * action_dim);
        return Mlp(sizes);
      }()) {
  net_.init_xavier(init_rng);
  if (!(variance_floor_ > 0.0)) throw std::invalid_argument("variance floor must be positive");
  // start near sigma^2 = 0.25 so early exploration is sane
  const double u0 = std::log(std::expm1(std::max(0.25 - variance_floor_, 0.05)));
  const int out = net_.sizes.back();
  const int in = net_.sizes[net_.sizes.size() - 2];
  double* bias = net_.params.data() + net_.params.size() - out;
  (void)in;
  for (int d = 0; d < action_dim_; ++d) bias[action_dim_ + d] = u0;
}

std::pair<Vec, Vec> GaussianMlpPolicy::distribution(const Obs& obs) const {
  const Vec out = net_.forward(obs, nullptr);
  Vec mu(out.begin(), out.begin() + action_dim_);
  Vec var(action_dim_);
  for (int d = 0; d < action_dim_; ++d) var[d] = softplus(out[action_dim_ + d]) + variance_floor_;
  return {std::move(mu), std::move(var)};
}

Action GaussianMlpPolicy::sample(const Obs& obs, Rng& rng) const {
  const auto [mu, var] = distribution(obs);
  Action a(action_dim_);
  for (int d = 0; d < action_dim_; ++d) a[d] = mu[d] + std::sqrt(var[d]) * rng.normal();
  return a;
}

double GaussianMlpPolicy::log_prob(const Obs& obs, const Action& action) const {
  if (static_cast<int>(action.size()) != action_dim_) {
    throw std::invalid_argument("action dimension mismatch");
  }
  const auto [mu, var] = distribution(obs);
  double lp = 0.0;
  for (int d = 0; d < action_dim_; ++d) {
    const double diff = action[d] - mu[d];
    lp += -0.5 * std::log(2.0 * M_PI * var[d]) - diff * diff / (2.0 * var[d]);
  }
  return lp;
}

Vec GaussianMlpPolicy::grad_log_prob(const Obs& obs, const Action& action) const {
  if (static_cast<int>(action.size()) != action_dim_) {
    throw std::invalid_argument("action dimension mismatch");
  }
  Mlp::Workspace ws;
  const Vec out = net_.forward(obs, &ws);
  Vec dout(2 * action_dim_);
  for (int d = 0; d < action_dim_; ++d) {
    const double u = out[action_dim_ + d];
    const double var = softplus(u) + variance_floor_;
    const double diff = action[d] - out[d];
    dout[d] = diff / var;
    const double dlogp_dvar = -0.5 / var + diff * diff / (2.0 * var * var);
    dout[action_dim_ + d] = dlogp_dvar * sigmoid(u);
  }
  return net_.backward(ws, dout);
}

std::unique_ptr<Policy> GaussianMlpPolicy::clone() const {
  return std::make_unique<GaussianMlpPolicy>(*this);
}

// -- MlpValue --------------------------------------------------------------

MlpValue::MlpValue(int input_dim, const std::vector<int>& hidden, Rng& init_rng)
    : net_([&] {
        std::vector<int> sizes{input_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(1);
        return Mlp(sizes);
      }()) {
  net_.init_xavier(init_rng);
}

double MlpValue::value(const Obs& input) const { return net_.forward(input, nullptr)[0]; }

std::pair<double, Vec> MlpValue::value_and_grad(const Obs& input) const {
  Mlp::Workspace ws;
  const Vec out = net_.forward(input, &ws);
  return {out[0], net_.backward(ws, {1.0})};
}

std::unique_ptr<ValueFunction> MlpValue::clone() const {
  return std::make_unique<MlpValue>(*this);
}

// -- ParamUpdater ------------------------------------------------------------

double ParamUpdater::rate_at(long long t) const {
  if (rule_.schedule == UpdateRule::Schedule::Constant) return rule_.alpha0;
  return rule_.alpha0 / std::pow(1.0 + static_cast<double>(t) / rule_.decay_tau, rule_.decay_pow);
}

void ParamUpdater::apply(Vec& params, const Vec& grad, double scale) {
  if (grad.size() != params.size()) throw std::invalid_argument("gradient size mismatch");
  check_finite(scale, "update scale");
  const double alpha = rate_at(t_);
  ++t_;
  if (!rule_.adam) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = scale * grad[i];
      check_finite(g, "gradient");
      params[i] += alpha * g;
    }
    return;
  }
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  const double b1t = 1.0 - std::pow(rule_.beta1, static_cast<double>(t_));
  const double b2t = 1.0 - std::pow(rule_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = scale * grad[i];
    check_finite(g, "gradient");
    m_[i] = rule_.beta1 * m_[i] + (1.0 - rule_.beta1) * g;
    v_[i] = rule_.beta2 * v_[i] + (1.0 - rule_.beta2) * g * g;
    params[i] += alpha * (m_[i] / b1t) / (std::sqrt(v_[i] / b2t) + rule_.eps);
  }
}

// -- finite differences --------------------------------------------------

FdReport finite_difference_check(const std::function<double(const Vec&)>& f, const Vec& params,
                                 const Vec& analytic_grad, int probe_count, double step,
                                 double tolerance, Rng& rng) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const int n = static_cast<int>(params.size());
  std::vector<int> probes;
  if (probe_count >= n) {
    probes.resize(n);
    for (int i = 0; i < n; ++i) probes[i] = i;
  } else {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int i = 0; i < probe_count; ++i) {
      std::swap(all[i], all[i + rng.uniform_int(n - i)]);
      probes.push_back(all[i]);
    }
  }
  FdReport report;
  Vec p = params;
  for (int idx : probes) {
    const double saved = p[idx];
    p[idx] = saved + step;
    const double fp = f(p);
    p[idx] = saved - step;
    const double fm = f(p);
    p[idx] = saved;
    const double fd = (fp - fm) / (2.0 * step);
    const double an = analytic_grad[idx];
    const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = idx;
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

// -- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::string& path, const std::string& kind, const Vec& params) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  std::fprintf(fp, "shaping-checkpoint v1 %s %zu\n", kind.c_str(), params.size());
  for (double v : params) std::fprintf(fp, "%.17g\n", v);
  std::fclose(fp);
}

Vec load_checkpoint(const std::string& path, std::string* kind) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open checkpoint: " + path);
  char tag[64], version[16], kindbuf[64];
  std::size_t count = 0;
  if (std::fscanf(fp, "%63s %15s %63s %zu", tag, version, kindbuf, &count) != 4 ||
      std::string(tag) != "shaping-checkpoint" || std::string(version) != "v1") {
    std::fclose(fp);
    throw std::runtime_error("unrecognized checkpoint header: " + path);
  }
  Vec params(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (std::fscanf(fp, "%lg", &params[i]) != 1) {
      std::fclose(fp);
      throw std::runtime_error("truncated checkpoint: " + path);
    }
  }
  std::fclose(fp);
  if (kind) *kind = kindbuf;
  return params;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open file for hashing: " + path);
  std::uint64_t h = 14695981039346656037ull;
  unsigned char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, fp)) > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= buf[i];
      h *= 1099511628211ull;
    }
  }
  std::fclose(fp);
  return h;
}

}  // namespace shaping
