#include "shaping/advice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shaping/gridworld_rules.hpp"

namespace shaping {

void AdviceConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("advice gamma must lie in [0, 1]");
  }
  if (mode == AdviceMode::LookBack && gamma == 0.0) {
    throw std::invalid_argument("look-back advice divides by gamma; gamma must be > 0");
  }
  for (const auto& p : potentials) {
    if (!p) throw std::invalid_argument("advice potential is null");
  }
}

const Potential& AdviceConfig::potential(int agent_index) const {
  if (agent_index < 0 || agent_index >= static_cast<int>(potentials.size())) {
    throw std::out_of_range("no potential for agent index");
  }
  return *potentials[agent_index];
}

double lookahead_advice(const AdviceConfig& cfg, const StateActionPair& current,
                        const std::optional<StateActionPair>& next, int agent_index) {
  const Potential& phi = cfg.potential(agent_index);
  const double phi_next =
      next ? phi.evaluate(next->state, next->joint_action, agent_index) : 0.0;
  return cfg.gamma * phi_next - phi.evaluate(current.state, current.joint_action, agent_index);
}

double lookback_advice(const AdviceConfig& cfg, const std::optional<StateActionPair>& previous,
                       const StateActionPair& current, int agent_index) {
  if (cfg.gamma == 0.0) {
    throw std::invalid_argument("look-back advice undefined at gamma == 0");
  }
  const Potential& phi = cfg.potential(agent_index);
  const double phi_prev =
      previous ? phi.evaluate(previous->state, previous->joint_action, agent_index) : 0.0;
  return phi.evaluate(current.state, current.joint_action, agent_index) - phi_prev / cfg.gamma;
}

double actor_correction(const AdviceConfig& cfg, const StateActionPair& current,
                        int agent_index) {
  if (cfg.mode == AdviceMode::LookBack) return 0.0;
  return cfg.potential(agent_index).evaluate(current.state, current.joint_action, agent_index);
}

namespace {

class ConstantPotential final : public Potential {
public:
  explicit ConstantPotential(double value) : value_(value) {}
  double evaluate(const State&, const std::vector<Action>&, int) const override {
    return value_;
  }
  Kind kind() const override { return Kind::Uniform; }

private:
  double value_;
};

class GridworldUniform final : public Potential {
public:
  GridworldUniform(double u0, double u1) : u0_(u0), u1_(u1) {}
  double evaluate(const State& s, const std::vector<Action>&, int) const override {
    const int y = static_cast<int>(s.at(1));
    return y <= 1 ? u0_ : u1_;
  }
  Kind kind() const override { return Kind::Uniform; }

private:
  double u0_, u1_;
};

class GridworldNonUniform final : public Potential {
public:
  GridworldNonUniform(double u0, double u1, double delta) {
    using namespace gridworld;
    table_.assign(kWidth * kHeight * kNumActions, 0.0);
    for (int y = 0; y < kHeight; ++y) {
      for (int x = 0; x < kWidth; ++x) {
        const double base = y <= 1 ? u0 : u1;
        bool good[kNumActions];
        int k = 0;
        for (int a = 0; a < kNumActions; ++a) {
          int nx, ny;
          move_dest(x, y, a, &nx, &ny);
          good[a] = l1_to_goal(nx, ny) < l1_to_goal(x, y);
          k += good[a] ? 1 : 0;
        }
        for (int a = 0; a < kNumActions; ++a) {
          const double off = good[a] ? (kNumActions - k) * delta / kNumActions
                                     : -k * delta / kNumActions;
          table_[(y * kWidth + x) * kNumActions + a] = base + off;
        }
      }
    }
  }
  double evaluate(const State& s, const std::vector<Action>& ja, int) const override {
    using namespace gridworld;
    const int x = static_cast<int>(s.at(0));
    const int y = static_cast<int>(s.at(1));
    const int a = static_cast<int>(ja.at(0).at(0));
    return table_.at((y * kWidth + x) * kNumActions + a);
  }
  Kind kind() const override { return Kind::NonUniform; }

private:
  std::vector<double> table_;
};

class MountainCarUniform final : public Potential {
public:
  explicit MountainCarUniform(double offset) : offset_(offset) {}
  double evaluate(const State& s, const std::vector<Action>&, int) const override {
    return s.at(0) + offset_;
  }
  Kind kind() const override { return Kind::Uniform; }

private:
  double offset_;
};

class MountainCarNonUniform final : public Potential {
public:
  double evaluate(const State& s, const std::vector<Action>& ja, int) const override {
    return ja.at(0).at(0) * s.at(1) > 0.0 ? 1.0 : 0.0;
  }
  Kind kind() const override { return Kind::NonUniform; }
};

class ParticlePotential final : public Potential {
public:
  ParticlePotential(ParticleTask task, Kind variant, const ParticleAdviceParams& params,
                    const ParticleLayout& layout, std::vector<int> team,
                    std::vector<int> anchors, int prey_index, bool linear)
      : task_(task),
        variant_(variant),
        params_(params),
        layout_(layout),
        team_(std::move(team)),
        anchors_(std::move(anchors)),
        prey_(prey_index),
        linear_(linear) {
    if (team_.empty()) throw std::invalid_argument("particle potential needs a team");
    advised_.assign(layout_.n_agents, false);
    for (int i : team_) {
      if (i < 0 || i >= layout_.n_agents) throw std::invalid_argument("team index out of range");
      advised_[i] = true;
    }
    if (task_ == ParticleTask::PredatorPrey) {
      if (prey_ < 0 || prey_ >= layout_.n_agents) {
        throw std::invalid_argument("predator-prey potential needs the prey index");
      }
    } else {
      if (anchors_.size() != team_.size()) {
        throw std::invalid_argument("anchor map must cover the team");
      }
      std::vector<bool> used(layout_.n_landmarks, false);
      for (int l : anchors_) {
        if (l < 0 || l >= layout_.n_landmarks || used[l]) {
          throw std::invalid_argument("anchor map is not a bijection onto the landmarks");
        }
        used[l] = true;
      }
      if (static_cast<int>(anchors_.size()) != layout_.n_landmarks) {
        throw std::invalid_argument("anchor map is not a bijection onto the landmarks");
      }
    }
  }

  double evaluate(const State& s, const std::vector<Action>& ja, int agent) const override {
    if (agent < 0 || agent >= layout_.n_agents || !advised_[agent]) return 0.0;
    double dist_sum = 0.0;
    for (std::size_t j = 0; j < team_.size(); ++j) {
      const Vec2 p = layout_.agent_pos(s, team_[j]);
      dist_sum += dist(p, target_of(s, j));
    }
    double value = linear_ ? dist_sum : params_.alpha * std::exp(-params_.beta * dist_sum);
    if (variant_ == Kind::NonUniform) {
      if (task_ == ParticleTask::PredatorPrey) {
        for (std::size_t j = 0; j < team_.size(); ++j) {
          value -= params_.M * member_angle(s, ja, j);
        }
      } else {
        const auto it = std::find(team_.begin(), team_.end(), agent);
        value -= params_.M * member_angle(s, ja, it - team_.begin());
      }
    }
    return value;
  }

  Kind kind() const override { return variant_; }

private:
  Vec2 target_of(const State& s, std::size_t member) const {
    if (task_ == ParticleTask::PredatorPrey) return layout_.agent_pos(s, prey_);
    return layout_.landmark_pos(s, anchors_[member]);
  }

  double member_angle(const State& s, const std::vector<Action>& ja, std::size_t member) const {
    const int i = team_[member];
    const Action& a = ja.at(i);
    // the angle is measured on the executed action, i.e. after the
    // environment's [-1,1] clip
    const Vec2 executed{std::clamp(a.at(0), -1.0, 1.0), std::clamp(a.at(1), -1.0, 1.0)};
    return angle_to_target(executed, layout_.agent_pos(s, i), target_of(s, member));
  }

  ParticleTask task_;
  Kind variant_;
  ParticleAdviceParams params_;
  ParticleLayout layout_;
  std::vector<int> team_;
  std::vector<int> anchors_;
  int prey_;
  bool linear_;
  std::vector<bool> advised_;
};

}  // namespace

PotentialPtr zero_potential() { return std::make_shared<ConstantPotential>(0.0); }

PotentialPtr constant_potential(double value) {
  return std::make_shared<ConstantPotential>(value);
}

PotentialPtr gridworld_uniform_potential(double u0, double u1) {
  if (!(u1 > u0)) {
    throw std::invalid_argument("gridworld potential requires u1 > u0");
  }
  return std::make_shared<GridworldUniform>(u0, u1);
}

PotentialPtr gridworld_nonuniform_potential(double u0, double u1, double delta) {
  if (!(u1 > u0)) {
    throw std::invalid_argument("gridworld potential requires u1 > u0");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("gridworld nonuniform potential requires delta > 0");
  }
  return std::make_shared<GridworldNonUniform>(u0, u1, delta);
}

PotentialPtr mountaincar_uniform_potential(double P) {
  if (!(P >= 1.2)) {
    throw std::invalid_argument("mountain-car potential offset must be >= 1.2");
  }
  return std::make_shared<MountainCarUniform>(P);
}

PotentialPtr mountaincar_nonuniform_potential() {
  return std::make_shared<MountainCarNonUniform>();
}

PotentialPtr particle_potential(ParticleTask task, Potential::Kind variant,
                                const ParticleAdviceParams& params,
                                const ParticleLayout& layout, std::vector<int> team,
                                std::vector<int> anchors, int prey_index) {
  return std::make_shared<ParticlePotential>(task, variant, params, layout, std::move(team),
                                             std::move(anchors), prey_index, false);
}

PotentialPtr particle_linear_distance_potential(const ParticleLayout& layout,
                                                std::vector<int> team, std::vector<int> anchors,
                                                int prey_index) {
  const ParticleTask task =
      prey_index >= 0 ? ParticleTask::PredatorPrey : ParticleTask::CooperativeNavigation;
  return std::make_shared<ParticlePotential>(task, Potential::Kind::Uniform,
                                             ParticleAdviceParams{}, layout, std::move(team),
                                             std::move(anchors), prey_index, true);
}

double angle_to_target(const Vec2& action_vec, const Vec2& position, const Vec2& target) {
  const Vec2 dir = target - position;
  const double dn = dir.norm();
  if (dn == 0.0) return 0.0;
  const double an = action_vec.norm();
  if (an == 0.0) return 1.5707963267948966;
  const double c = std::clamp(action_vec.dot(dir) / (an * dn), -1.0, 1.0);
  return std::acos(c);
}

std::vector<int> anchor_assignment(const std::vector<Vec2>& agent_positions,
                                   const std::vector<Vec2>& landmark_positions) {
  if (agent_positions.size() != landmark_positions.size()) {
    throw std::invalid_argument("anchor assignment needs equal agent and landmark counts");
  }
  std::vector<int> anchors(agent_positions.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) anchors[i] = static_cast<int>(i);
  return anchors;
}

}  // namespace shaping
