#pragma once

#include <cmath>
#include <stdexcept>

#include "shaping/core.hpp"

namespace shaping {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator*(double c) const { return {x * c, y * c}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Layout of a particle-world state vector, shared between the simulator
/// and the potentials that read it:
///   [agent 0: px py vx vy] ... [agent n-1: ...] [landmark 0: lx ly] ...
///   [target landmark index, physical-deception only]
struct ParticleLayout {
  int n_agents = 0;
  int n_landmarks = 0;
  bool has_target = false;

  int state_dim() const { return n_agents * 4 + n_landmarks * 2 + (has_target ? 1 : 0); }

  Vec2 agent_pos(const State& s, int i) const {
    check(s, i, n_agents);
    return {s[4 * i], s[4 * i + 1]};
  }
  Vec2 agent_vel(const State& s, int i) const {
    check(s, i, n_agents);
    return {s[4 * i + 2], s[4 * i + 3]};
  }
  Vec2 landmark_pos(const State& s, int j) const {
    check(s, j, n_landmarks);
    const int base = n_agents * 4 + 2 * j;
    return {s[base], s[base + 1]};
  }
  int target_index(const State& s) const {
    if (!has_target) throw std::logic_error("layout has no target landmark");
    return static_cast<int>(s[state_dim() - 1]);
  }

private:
  void check(const State& s, int idx, int bound) const {
    if (static_cast<int>(s.size()) != state_dim()) {
      throw std::invalid_argument("state size does not match particle layout");
    }
    if (idx < 0 || idx >= bound) throw std::out_of_range("particle entity index");
  }
};

}  // namespace shaping
