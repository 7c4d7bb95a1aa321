#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "shaping/core.hpp"

namespace shaping {

/// Stochastic policy with a flat parameter vector and closed-form score
/// gradients. Actors only ever see their own observation; that is the
/// decentralized-execution contract.
class Policy {
public:
  virtual ~Policy() = default;
  virtual Action sample(const Obs& obs, Rng& rng) const = 0;
  virtual double log_prob(const Obs& obs, const Action& action) const = 0;
  /// Exact gradient of log pi(action|obs) with respect to params().
  virtual Vec grad_log_prob(const Obs& obs, const Action& action) const = 0;
  virtual Vec& params() = 0;
  virtual const Vec& params() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
  std::size_t param_count() const { return params().size(); }
};

class ValueFunction {
public:
  virtual ~ValueFunction() = default;
  virtual double value(const Obs& input) const = 0;
  /// Value plus exact gradient with respect to params().
  virtual std::pair<double, Vec> value_and_grad(const Obs& input) const = 0;
  virtual Vec& params() = 0;
  virtual const Vec& params() const = 0;
  virtual std::unique_ptr<ValueFunction> clone() const = 0;
  std::size_t param_count() const { return params().size(); }
};

// -- tabular softmax ---------------------------------------------------------

/// pi(a|s) = exp(theta[s,a]) / sum_a' exp(theta[s,a']), one row per
/// observation id. Observations are single-element vectors holding the id.
class TabularSoftmaxPolicy final : public Policy {
public:
  TabularSoftmaxPolicy(int n_observations, int n_actions);

  Action sample(const Obs& obs, Rng& rng) const override;
  double log_prob(const Obs& obs, const Action& action) const override;
  Vec grad_log_prob(const Obs& obs, const Action& action) const override;
  Vec& params() override { return theta_; }
  const Vec& params() const override { return theta_; }
  std::unique_ptr<Policy> clone() const override;

  /// Action distribution at one observation (sums to 1).
  Vec probabilities(int obs_id) const;
  int n_actions() const { return n_actions_; }
  int n_observations() const { return n_obs_; }

private:
  int obs_id(const Obs& obs) const;
  int n_obs_, n_actions_;
  Vec theta_;
};

// -- linear value ------------------------------------------------------------

using FeatureMap = std::function<Vec(const Obs&)>;

/// V(s) = phi(s) . omega with a fixed feature map.
class LinearValue final : public ValueFunction {
public:
  LinearValue(FeatureMap features, int n_features);

  double value(const Obs& input) const override;
  std::pair<double, Vec> value_and_grad(const Obs& input) const override;
  Vec& params() override { return omega_; }
  const Vec& params() const override { return omega_; }
  std::unique_ptr<ValueFunction> clone() const override;

private:
  FeatureMap features_;
  Vec omega_;
};

FeatureMap one_hot_features(int n);
/// Raw input with a trailing bias term.
FeatureMap identity_bias_features(int input_dim);

// -- small MLPs --------------------------------------------------------------

/// Fully connected net with tanh hidden layers and a linear output layer.
/// Parameters live in one flat vector: [W0, b0, W1, b1, ...], W row-major.
struct Mlp {
  std::vector<int> sizes;  // input, hidden..., output
  Vec params;

  explicit Mlp(std::vector<int> layer_sizes);
  void init_xavier(Rng& rng);

  struct Workspace {
    std::vector<Vec> act;  // post-activation per layer, act[0] is the input
  };
  Vec forward(const Obs& input, Workspace* ws) const;
  /// Gradient of (dout . output) with respect to params, using the
  /// activations recorded by forward().
  Vec backward(const Workspace& ws, const Vec& dout) const;

  int param_count() const;
};

/// Diagonal Gaussian policy; the net outputs [mean..., u...] with
/// variance = softplus(u) + floor. Log-densities are evaluated on the
/// pre-clip action (clipping is the environment's business).
class GaussianMlpPolicy final : public Policy {
public:
  GaussianMlpPolicy(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& init_rng,
                    double variance_floor = 1e-4);

  Action sample(const Obs& obs, Rng& rng) const override;
  double log_prob(const Obs& obs, const Action& action) const override;
  Vec grad_log_prob(const Obs& obs, const Action& action) const override;
  Vec& params() override { return net_.params; }
  const Vec& params() const override { return net_.params; }
  std::unique_ptr<Policy> clone() const override;

  /// (mean, variance) heads at an observation.
  std::pair<Vec, Vec> distribution(const Obs& obs) const;

private:
  int action_dim_;
  double variance_floor_;
  Mlp net_;
};

class MlpValue final : public ValueFunction {
public:
  MlpValue(int input_dim, const std::vector<int>& hidden, Rng& init_rng);

  double value(const Obs& input) const override;
  std::pair<double, Vec> value_and_grad(const Obs& input) const override;
  Vec& params() override { return net_.params; }
  const Vec& params() const override { return net_.params; }
  std::unique_ptr<ValueFunction> clone() const override;

private:
  Mlp net_;
};

// -- parameter updates -------------------------------------------------------

struct UpdateRule {
  enum class Schedule { Constant, Decay };
  double alpha0 = 0.01;
  Schedule schedule = Schedule::Constant;
  /// Decaying rate alpha_t = alpha0 / (1 + t/tau)^pow. The defaults give
  /// the Robbins-Monro pair (sum alpha_t diverges, sum alpha_t^2 converges).
  double decay_tau = 1.0;
  double decay_pow = 1.0;
  bool adam = false;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// Applies gradient-ascent steps params += alpha_t * direction, optionally
/// through the Adam accumulator. Throws on non-finite directions.
class ParamUpdater {
public:
  explicit ParamUpdater(UpdateRule rule) : rule_(rule) {}

  /// direction = scale * grad, folded in before the Adam transform.
  void apply(Vec& params, const Vec& grad, double scale);
  double rate_at(long long t) const;
  long long steps() const { return t_; }
  const UpdateRule& rule() const { return rule_; }

private:
  UpdateRule rule_;
  Vec m_, v_;
  long long t_ = 0;
};

// -- verification ------------------------------------------------------------

struct FdReport {
  bool pass = true;
  double max_rel_error = 0.0;
  int worst_index = -1;
};

/// Central-difference probe of an analytic gradient at `params`. Probes
/// min(probe_count, dim) coordinates (all of them when probe_count covers
/// the dimension, otherwise a random subset).
FdReport finite_difference_check(const std::function<double(const Vec&)>& f, const Vec& params,
                                 const Vec& analytic_grad, int probe_count, double step,
                                 double tolerance, Rng& rng);

// -- checkpoints -------------------------------------------------------------

/// Flat text checkpoint: "shaping-checkpoint v1 <kind> <count>" then one
/// %.17g value per line.
void save_checkpoint(const std::string& path, const std::string& kind, const Vec& params);
Vec load_checkpoint(const std::string& path, std::string* kind = nullptr);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace shaping
