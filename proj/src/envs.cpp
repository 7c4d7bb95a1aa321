#include "shaping/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "shaping/gridworld_rules.hpp"

namespace shaping {

namespace {

void require_running(bool started, bool done) {
  if (!started) throw std::logic_error("step before reset");
  if (done) throw std::logic_error("step after the episode ended");
}

std::string format_line(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

}  // namespace

// -- PuddleJumpGridworld -----------------------------------------------------

PuddleJumpGridworld::PuddleJumpGridworld(double jump_prob, int step_cap)
    : jump_prob_(jump_prob), step_cap_(step_cap) {
  if (!(jump_prob >= 0.0 && jump_prob <= 1.0)) {
    throw std::invalid_argument("jump probability must lie in [0, 1]");
  }
  if (step_cap <= 0) throw std::invalid_argument("step cap must be positive");
}

Obs PuddleJumpGridworld::observe() const {
  return {static_cast<double>(gridworld::observation_id(x_, y_))};
}

ResetResult PuddleJumpGridworld::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  x_ = 0;
  y_ = 0;
  steps_ = 0;
  terminal_ = false;
  started_ = true;
  return {{0.0, 0.0}, {observe()}};
}

bool PuddleJumpGridworld::done() const {
  return !started_ || terminal_ || steps_ >= step_cap_;
}

TransitionSample PuddleJumpGridworld::step(const std::vector<Action>& actions) {
  require_running(started_, done());
  if (actions.size() != 1 || actions[0].size() != 1) {
    throw std::invalid_argument("gridworld expects one discrete action");
  }
  const int a = static_cast<int>(std::llround(actions[0][0]));
  if (a < 0 || a >= gridworld::kNumActions) throw std::out_of_range("gridworld action id");

  TransitionSample tr;
  tr.state = {static_cast<double>(x_), static_cast<double>(y_)};
  tr.observations = {observe()};
  tr.actions = actions;

  int nx = x_, ny = y_;
  if (a == gridworld::kJump) {
    if ((y_ == 1 || y_ == 3) && rng_.uniform() < jump_prob_) {
      gridworld::move_dest(x_, y_, a, &nx, &ny);
    }
  } else {
    gridworld::move_dest(x_, y_, a, &nx, &ny);
  }
  x_ = nx;
  y_ = ny;
  ++steps_;

  terminal_ = (x_ == gridworld::kGoalX && y_ == gridworld::kGoalY);
  tr.rewards = {terminal_ ? 1000.0 : -0.05};
  tr.next_state = {static_cast<double>(x_), static_cast<double>(y_)};
  tr.next_observations = {observe()};
  tr.terminal = terminal_;
  return tr;
}

ActionSpace PuddleJumpGridworld::action_space(int) const {
  ActionSpace sp;
  sp.kind = ActionSpace::Kind::Discrete;
  sp.count = gridworld::kNumActions;
  return sp;
}

std::string PuddleJumpGridworld::describe() const {
  std::string s = "puddle-jump gridworld 10x10, start (0,0), goal (9,9), puddle row 2\n";
  s += "actions {up,down,left,right,jump}; moves into the puddle row are blocked\n";
  s += format_line("jump success probability %g, step cap %g\n",
                   jump_prob_, static_cast<double>(step_cap_));
  s += "reward -0.05 per action, +1000 on the goal step; observations alias (9,8)/(8,9)\n";
  return s;
}

// -- MountainCar -------------------------------------------------------------

MountainCar::MountainCar(int step_cap) : step_cap_(step_cap) {
  if (step_cap <= 0) throw std::invalid_argument("step cap must be positive");
}

Obs MountainCar::observe() const { return {p_, v_ / 0.07}; }

ResetResult MountainCar::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  p_ = rng_.uniform(-0.6, -0.4);
  v_ = 0.0;
  steps_ = 0;
  terminal_ = false;
  started_ = true;
  return {{p_, v_}, {observe()}};
}

bool MountainCar::done() const { return !started_ || terminal_ || steps_ >= step_cap_; }

TransitionSample MountainCar::step(const std::vector<Action>& actions) {
  require_running(started_, done());
  if (actions.size() != 1 || actions[0].size() != 1) {
    throw std::invalid_argument("mountain car expects one scalar action");
  }
  TransitionSample tr;
  tr.state = {p_, v_};
  tr.observations = {observe()};
  tr.actions = actions;

  const double a = std::clamp(actions[0][0], -1.0, 1.0);
  v_ = std::clamp(v_ + 0.0015 * a - 0.0025 * std::cos(3.0 * p_), -0.07, 0.07);
  p_ += v_;
  if (p_ <= -1.2) {
    p_ = -1.2;
    v_ = 0.0;  // inelastic left wall
  }
  if (p_ > 0.6) p_ = 0.6;
  ++steps_;

  terminal_ = p_ >= kGoalPosition;
  tr.rewards = {terminal_ ? 100.0 : -a * a};
  tr.next_state = {p_, v_};
  tr.next_observations = {observe()};
  tr.terminal = terminal_;
  return tr;
}

ActionSpace MountainCar::action_space(int) const {
  ActionSpace sp;
  sp.kind = ActionSpace::Kind::Box;
  sp.low = {-1.0};
  sp.high = {1.0};
  return sp;
}

std::string MountainCar::describe() const {
  std::string s = "continuous mountain car: p in [-1.2,0.6], v in [-0.07,0.07], a in [-1,1]\n";
  s += "v' = clip(v + 0.0015 a - 0.0025 cos(3p)); p' = clip(p + v'); inelastic left wall\n";
  s += format_line("goal p >= %g, step cap %g\n", kGoalPosition, static_cast<double>(step_cap_));
  s += "reward -|a|^2 before the goal, +100 on the goal step; start p ~ U[-0.6,-0.4], v = 0\n";
  return s;
}

// -- ParticleWorld -----------------------------------------------------------

ParticleWorld::ParticleWorld(ParticleConfig cfg) : cfg_(cfg) {
  if (cfg_.n < 1) throw std::invalid_argument("particle world needs at least one agent");
  if (cfg_.episode_len < 1) throw std::invalid_argument("episode length must be positive");
  switch (cfg_.task) {
    case ParticleTask::CooperativeNavigation:
      n_agents_ = cfg_.n;
      n_landmarks_ = cfg_.n;
      break;
    case ParticleTask::PhysicalDeception:
      n_agents_ = cfg_.n + 1;  // adversary first
      n_landmarks_ = cfg_.n;
      break;
    case ParticleTask::PredatorPrey:
      n_agents_ = cfg_.n + 1;  // prey last
      n_landmarks_ = 2;        // obstacles
      break;
  }
  layout_ = ParticleLayout{n_agents_, n_landmarks_,
                           cfg_.task == ParticleTask::PhysicalDeception};
  pos_.assign(n_agents_, {});
  vel_.assign(n_agents_, {});
  landmarks_.assign(n_landmarks_, {});
}

bool ParticleWorld::is_prey(int i) const {
  return cfg_.task == ParticleTask::PredatorPrey && i == n_agents_ - 1;
}

bool ParticleWorld::is_adversary(int i) const {
  return cfg_.task == ParticleTask::PhysicalDeception && i == 0;
}

int ParticleWorld::prey_index() const {
  return cfg_.task == ParticleTask::PredatorPrey ? n_agents_ - 1 : -1;
}

int ParticleWorld::adversary_index() const {
  return cfg_.task == ParticleTask::PhysicalDeception ? 0 : -1;
}

std::vector<int> ParticleWorld::team() const {
  std::vector<int> t;
  for (int i = 0; i < n_agents_; ++i) {
    if (!is_prey(i) && !is_adversary(i)) t.push_back(i);
  }
  return t;
}

std::string ParticleWorld::role(int agent) const {
  if (is_prey(agent)) return "prey";
  if (is_adversary(agent)) return "adversary";
  return cfg_.task == ParticleTask::PredatorPrey ? "predator" : "agent";
}

State ParticleWorld::pack_state() const {
  State s;
  s.reserve(layout_.state_dim());
  for (int i = 0; i < n_agents_; ++i) {
    s.push_back(pos_[i].x);
    s.push_back(pos_[i].y);
    s.push_back(vel_[i].x);
    s.push_back(vel_[i].y);
  }
  for (const auto& l : landmarks_) {
    s.push_back(l.x);
    s.push_back(l.y);
  }
  if (layout_.has_target) s.push_back(static_cast<double>(target_));
  return s;
}

Obs ParticleWorld::observe(int agent) const {
  Obs o{vel_[agent].x, vel_[agent].y, pos_[agent].x, pos_[agent].y};
  if (is_adversary(agent)) {
    // seed-shuffled landmark order; no target identity anywhere
    for (int j : adversary_landmark_order_) {
      o.push_back(landmarks_[j].x - pos_[agent].x);
      o.push_back(landmarks_[j].y - pos_[agent].y);
    }
  } else {
    if (cfg_.task == ParticleTask::PhysicalDeception) {
      o.push_back(landmarks_[target_].x - pos_[agent].x);
      o.push_back(landmarks_[target_].y - pos_[agent].y);
    }
    for (const auto& l : landmarks_) {
      o.push_back(l.x - pos_[agent].x);
      o.push_back(l.y - pos_[agent].y);
    }
  }
  for (int k = 0; k < n_agents_; ++k) {
    if (k == agent) continue;
    o.push_back(pos_[k].x - pos_[agent].x);
    o.push_back(pos_[k].y - pos_[agent].y);
  }
  return o;
}

ResetResult ParticleWorld::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  for (int i = 0; i < n_agents_; ++i) {
    pos_[i] = {rng_.uniform(-cfg_.spawn_range, cfg_.spawn_range),
               rng_.uniform(-cfg_.spawn_range, cfg_.spawn_range)};
    vel_[i] = {0.0, 0.0};
  }
  for (auto& l : landmarks_) {
    l = {rng_.uniform(-cfg_.spawn_range, cfg_.spawn_range),
         rng_.uniform(-cfg_.spawn_range, cfg_.spawn_range)};
  }
  if (cfg_.task == ParticleTask::PhysicalDeception) {
    target_ = rng_.uniform_int(n_landmarks_);
    adversary_landmark_order_.resize(n_landmarks_);
    for (int j = 0; j < n_landmarks_; ++j) adversary_landmark_order_[j] = j;
    for (int j = n_landmarks_ - 1; j > 0; --j) {
      std::swap(adversary_landmark_order_[j],
                adversary_landmark_order_[rng_.uniform_int(j + 1)]);
    }
  }
  steps_ = 0;
  success_events_ = 0;
  started_ = true;

  ResetResult rr;
  rr.state = pack_state();
  for (int i = 0; i < n_agents_; ++i) rr.observations.push_back(observe(i));
  return rr;
}

bool ParticleWorld::done() const { return !started_ || steps_ >= cfg_.episode_len; }

TransitionSample ParticleWorld::step(const std::vector<Action>& actions) {
  require_running(started_, done());
  if (static_cast<int>(actions.size()) != n_agents_) {
    throw std::invalid_argument("particle world expects one action per agent");
  }
  for (const auto& a : actions) {
    if (a.size() != 2) throw std::invalid_argument("particle actions are 2-vectors");
  }

  TransitionSample tr;
  tr.state = pack_state();
  for (int i = 0; i < n_agents_; ++i) tr.observations.push_back(observe(i));
  tr.actions = actions;

  for (int i = 0; i < n_agents_; ++i) {
    const double accel = is_prey(i) ? cfg_.prey_accel : cfg_.accel;
    const double cap = is_prey(i) ? cfg_.prey_max_speed : cfg_.max_speed;
    const Vec2 a{std::clamp(actions[i][0], -1.0, 1.0), std::clamp(actions[i][1], -1.0, 1.0)};
    vel_[i] = vel_[i] * (1.0 - cfg_.damping) + a * (accel * cfg_.dt);
    const double speed = vel_[i].norm();
    if (speed > cap) vel_[i] = vel_[i] * (cap / speed);
    pos_[i] = pos_[i] + vel_[i] * cfg_.dt;

    if (cfg_.task == ParticleTask::PredatorPrey) {
      const double body = is_prey(i) ? cfg_.prey_radius : cfg_.agent_radius;
      for (const auto& obst : landmarks_) {
        const Vec2 d = pos_[i] - obst;
        const double dn = d.norm();
        const double min_d = body + cfg_.obstacle_radius;
        if (dn < min_d && dn > 0.0) {
          const Vec2 unit = d * (1.0 / dn);
          pos_[i] = obst + unit * min_d;
          const double radial = vel_[i].dot(unit);
          if (radial < 0.0) vel_[i] = vel_[i] - unit * (2.0 * radial);  // elastic pushback
        }
      }
    }
    for (double* c : {&pos_[i].x, &pos_[i].y}) {
      if (*c > cfg_.arena_bound) { *c = cfg_.arena_bound; }
      if (*c < -cfg_.arena_bound) { *c = -cfg_.arena_bound; }
    }
  }
  ++steps_;

  std::vector<double> rewards(n_agents_, 0.0);
  switch (cfg_.task) {
    case ParticleTask::CooperativeNavigation: {
      int reached = 0;
      for (const auto& l : landmarks_) {
        for (int i = 0; i < n_agents_; ++i) {
          if (dist(pos_[i], l) < cfg_.agent_radius + cfg_.landmark_radius) {
            ++reached;
            break;
          }
        }
      }
      if (reached > 0) {
        success_events_ += reached;
        for (double& r : rewards) r += cfg_.rewards.cn_reach * reached;
      }
      for (int i = 0; i < n_agents_; ++i) {
        for (int j = i + 1; j < n_agents_; ++j) {
          if (dist(pos_[i], pos_[j]) < 2.0 * cfg_.agent_radius) {
            rewards[i] += cfg_.rewards.cn_collision;
            rewards[j] += cfg_.rewards.cn_collision;
          }
        }
      }
      break;
    }
    case ParticleTask::PhysicalDeception: {
      const Vec2 tgt = landmarks_[target_];
      bool good_reach = false;
      for (int i = 1; i < n_agents_; ++i) {
        if (dist(pos_[i], tgt) < cfg_.agent_radius + cfg_.landmark_radius) good_reach = true;
      }
      const bool adv_reach =
          dist(pos_[0], tgt) < cfg_.agent_radius + cfg_.landmark_radius;
      if (good_reach) {
        success_events_ += 1;
        for (int i = 1; i < n_agents_; ++i) rewards[i] += cfg_.rewards.pd_agent_reach;
      }
      if (adv_reach) {
        rewards[0] += cfg_.rewards.pd_adversary_reach;
        for (int i = 1; i < n_agents_; ++i) rewards[i] += cfg_.rewards.pd_adversary_reach_penalty;
      }
      break;
    }
    case ParticleTask::PredatorPrey: {
      const int prey = n_agents_ - 1;
      int collisions = 0;
      for (int i = 0; i < prey; ++i) {
        if (dist(pos_[i], pos_[prey]) < cfg_.agent_radius + cfg_.prey_radius) ++collisions;
      }
      if (collisions > 0) {
        success_events_ += collisions;
        for (int i = 0; i < prey; ++i) rewards[i] += cfg_.rewards.pp_predator_collision * collisions;
        rewards[prey] += cfg_.rewards.pp_prey_collision * collisions;
      }
      break;
    }
  }

  tr.rewards = rewards;
  tr.next_state = pack_state();
  for (int i = 0; i < n_agents_; ++i) tr.next_observations.push_back(observe(i));
  tr.terminal = false;  // fixed-horizon task, the cap ends the episode
  return tr;
}

ActionSpace ParticleWorld::action_space(int) const {
  ActionSpace sp;
  sp.kind = ActionSpace::Kind::Box;
  sp.low = {-1.0, -1.0};
  sp.high = {1.0, 1.0};
  return sp;
}

std::string ParticleWorld::describe() const {
  const char* name = cfg_.task == ParticleTask::CooperativeNavigation ? "cooperative navigation"
                     : cfg_.task == ParticleTask::PhysicalDeception   ? "physical deception"
                                                                      : "predator-prey";
  std::string s = std::string("particle world task: ") + name + "\n";
  s += format_line("agents %g, landmarks %g, episode length %g\n",
                   static_cast<double>(n_agents_), static_cast<double>(n_landmarks_),
                   static_cast<double>(cfg_.episode_len));
  s += format_line("dt %g, damping %g, accel %g (prey %g)\n", cfg_.dt, cfg_.damping, cfg_.accel);
  s += format_line("max speed %g (prey %g), agent radius %g\n", cfg_.max_speed,
                   cfg_.prey_max_speed, cfg_.agent_radius);
  s += format_line("landmark radius %g (obstacle %g), spawn range %g\n", cfg_.landmark_radius,
                   cfg_.obstacle_radius, cfg_.spawn_range);
  switch (cfg_.task) {
    case ParticleTask::CooperativeNavigation:
      s += format_line("shared reach reward %g per covered landmark, collision %g\n",
                       cfg_.rewards.cn_reach, cfg_.rewards.cn_collision);
      break;
    case ParticleTask::PhysicalDeception:
      s += format_line("agent target reward %g / penalty %g, adversary reward %g\n",
                       cfg_.rewards.pd_agent_reach, cfg_.rewards.pd_adversary_reach_penalty,
                       cfg_.rewards.pd_adversary_reach);
      break;
    case ParticleTask::PredatorPrey:
      s += format_line("collision reward %g per predator, prey penalty %g\n",
                       cfg_.rewards.pp_predator_collision, cfg_.rewards.pp_prey_collision);
      break;
  }
  return s;
}

// -- rollout ------------------------------------------------------------

Trajectory rollout(EnvInterface& env, std::uint64_t seed,
                   const std::vector<std::vector<Action>>& actions) {
  Trajectory traj;
  traj.episode_seed = seed;
  env.reset(seed);
  for (const auto& joint : actions) {
    if (env.done()) break;
    traj.steps.push_back(env.step(joint));
  }
  return traj;
}

}  // namespace shaping
