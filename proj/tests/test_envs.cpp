#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "shaping/envs.hpp"
#include "shaping/gridworld_rules.hpp"

using namespace shaping;

namespace {

// drive the gridworld to a chosen cell with p_j = 1 moves
void drive_to(PuddleJumpGridworld& env, int x, int y) {
  for (int i = 0; i < x; ++i) env.step({{double(gridworld::kRight)}});
  int cur = 0;
  while (cur < y) {
    if (cur == 1) {
      env.step({{double(gridworld::kJump)}});
      cur = 3;
    } else {
      env.step({{double(gridworld::kUp)}});
      ++cur;
    }
  }
}

}  // namespace

TEST_CASE("gridworld movement and rewards") {
  PuddleJumpGridworld env(1.0);
  env.reset(0);

  auto tr = env.step({{double(gridworld::kRight)}});
  CHECK(tr.next_state == State{1.0, 0.0});
  CHECK(tr.rewards[0] == doctest::Approx(-0.05));
  CHECK_FALSE(tr.terminal);

  // off-grid moves keep the state unchanged
  tr = env.step({{double(gridworld::kDown)}});
  CHECK(tr.next_state == State{1.0, 0.0});

  // moving up from row 1 into the puddle row is blocked
  env.step({{double(gridworld::kUp)}});  // now row 1
  tr = env.step({{double(gridworld::kUp)}});
  CHECK(tr.next_state == State{1.0, 1.0});

  // deterministic jump with p_j = 1 crosses from row 1 to row 3
  tr = env.step({{double(gridworld::kJump)}});
  CHECK(tr.next_state == State{1.0, 3.0});
  // and back
  tr = env.step({{double(gridworld::kJump)}});
  CHECK(tr.next_state == State{1.0, 1.0});

  // jump away from rows 1/3 is a no-op
  env.reset(0);
  tr = env.step({{double(gridworld::kJump)}});
  CHECK(tr.next_state == State{0.0, 0.0});
}

TEST_CASE("gridworld left wall example") {
  PuddleJumpGridworld env(1.0);
  env.reset(0);
  drive_to(env, 0, 5);
  const auto tr = env.step({{double(gridworld::kLeft)}});
  CHECK(tr.state == State{0.0, 5.0});
  CHECK(tr.next_state == State{0.0, 5.0});
}

TEST_CASE("gridworld goal, terminal handling, and step cap") {
  PuddleJumpGridworld env(1.0);
  env.reset(3);
  drive_to(env, 9, 8);
  const auto tr = env.step({{double(gridworld::kUp)}});
  CHECK(tr.terminal);
  CHECK(tr.rewards[0] == doctest::Approx(1000.0));
  CHECK(env.done());
  CHECK(env.episode_success());
  CHECK_THROWS_AS(env.step({{0.0}}), std::logic_error);

  PuddleJumpGridworld capped(0.0, 5);
  capped.reset(0);
  for (int i = 0; i < 5; ++i) capped.step({{double(gridworld::kRight)}});
  CHECK(capped.done());
  CHECK_FALSE(capped.episode_success());
  CHECK_THROWS_AS(capped.step({{0.0}}), std::logic_error);
}

TEST_CASE("gridworld jump probability and observation aliasing") {
  PuddleJumpGridworld env(0.3);
  int successes = 0;
  const int trials = 20000;
  for (int k = 0; k < trials; ++k) {
    env.reset(k);
    env.step({{double(gridworld::kUp)}});
    const auto tr = env.step({{double(gridworld::kJump)}});
    successes += tr.next_state == State{0.0, 3.0};
  }
  CHECK(std::abs(successes / double(trials) - 0.3) < 0.01);

  CHECK(gridworld::observation_id(9, 8) == gridworld::observation_id(8, 9));
  std::set<int> ids;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) ids.insert(gridworld::observation_id(x, y));
  }
  CHECK(ids.size() == 99);
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == 98);
}

TEST_CASE("gridworld reachability under the jump-then-greedy script") {
  PuddleJumpGridworld env(0.2);
  int reached = 0;
  for (int k = 0; k < 50; ++k) {
    env.reset(1000 + k);
    int y = 0;
    while (!env.done()) {
      int action;
      if (y == 1) {
        action = gridworld::kJump;
      } else if (y < 9) {
        action = gridworld::kUp;
      } else {
        action = gridworld::kRight;
      }
      const auto tr = env.step({{double(action)}});
      y = int(tr.next_state[1]);
    }
    reached += env.episode_success();
  }
  CHECK(reached == 50);
}

TEST_CASE("mountain car dynamics match the closed form") {
  MountainCar env;
  env.reset(0);
  // place the car deterministically by construction: reset draws p in
  // [-0.6,-0.4]; evaluate one step against an independent recomputation
  const auto start = env.reset(7);
  const double p0 = start.state[0];
  const auto tr = env.step({{1.0}});
  const double v1 = 0.0015 * 1.0 - 0.0025 * std::cos(3.0 * p0);
  CHECK(tr.next_state[1] == doctest::Approx(v1).epsilon(1e-12));
  CHECK(tr.next_state[0] == doctest::Approx(p0 + v1).epsilon(1e-12));
  CHECK(tr.rewards[0] == doctest::Approx(-1.0));

  // the spec's worked example at p = -0.5, v = 0
  const double vx = 0.0015 - 0.0025 * std::cos(-1.5);
  CHECK(vx == doctest::Approx(0.00132315699583).epsilon(1e-9));
}

TEST_CASE("mountain car rewards and termination") {
  MountainCar env;
  env.reset(1);
  const auto tr = env.step({{0.0}});
  CHECK(tr.rewards[0] == doctest::Approx(0.0));

  // action clipping: |a| > 1 behaves like a = 1 and costs -1
  MountainCar env2;
  env2.reset(1);
  const auto big = env2.step({{4.0}});
  MountainCar env3;
  env3.reset(1);
  const auto one = env3.step({{1.0}});
  CHECK(big.next_state == one.next_state);

  // a = 0 with v = 0 at the valley bottom is a fixed point: never reaches the goal
  MountainCar still(500);
  still.reset(2);
  // drive to the exact bottom: cos(3p) = 0 at p = -pi/6
  int steps = 0;
  bool moved_past_goal = false;
  while (!still.done()) {
    const auto s = still.step({{0.0}});
    moved_past_goal = moved_past_goal || s.terminal;
    ++steps;
  }
  CHECK_FALSE(moved_past_goal);
  CHECK(steps == 500);
}

TEST_CASE("mountain car goal step") {
  // bang-bang energy pumping reaches the goal; the goal step pays +100
  MountainCar env(3000);
  env.reset(3);
  double v = 0.0;
  double last_reward = 0.0;
  while (!env.done()) {
    const auto s = env.step({{v >= 0.0 ? 1.0 : -1.0}});
    v = s.next_state[1];
    last_reward = s.rewards[0];
  }
  CHECK(env.episode_success());
  CHECK(last_reward == doctest::Approx(100.0));
}

TEST_CASE("particle world dynamics") {
  ParticleConfig pc;
  ParticleWorld env(pc);
  env.reset(5);

  // zero actions from rest: nothing moves, rewards need not fire
  const auto before = env.reset(5);
  const auto tr = env.step({{0, 0}, {0, 0}, {0, 0}});
  CHECK(tr.next_state == before.state);

  // damping decays speed geometrically once actions stop
  env.reset(6);
  env.step({{1, 0}, {1, 0}, {1, 0}});
  auto s1 = env.step({{0, 0}, {0, 0}, {0, 0}});
  const ParticleLayout& layout = env.layout();
  const double v_after = layout.agent_vel(s1.next_state, 0).norm();
  const double v_before = layout.agent_vel(s1.state, 0).norm();
  CHECK(v_after == doctest::Approx(v_before * (1.0 - pc.damping)));

  // speed cap holds under sustained full throttle
  env.reset(7);
  double top = 0.0;
  for (int t = 0; t < 20 && !env.done(); ++t) {
    const auto s = env.step({{1, 0}, {1, 0}, {1, 0}});
    for (int i = 0; i < 3; ++i) {
      top = std::max(top, layout.agent_vel(s.next_state, i).norm());
    }
  }
  CHECK(top <= pc.max_speed + 1e-12);

  CHECK_THROWS_AS(env.step({{0, 0}}), std::invalid_argument);
}

TEST_CASE("cooperative navigation rewards") {
  ParticleConfig pc;
  pc.n = 3;
  ParticleWorld env(pc);
  env.reset(8);
  // construct a reach event by teleport-free drive is fiddly; instead verify
  // the shared-reward arithmetic across many random episodes
  Rng rng(9);
  bool saw_shared = false;
  for (int ep = 0; ep < 60 && !saw_shared; ++ep) {
    env.reset(ep);
    while (!env.done()) {
      std::vector<Action> joint;
      for (int i = 0; i < 3; ++i) joint.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
      const auto tr = env.step(joint);
      int covered = 0;
      for (int j = 0; j < 3; ++j) {
        const Vec2 lm = env.layout().landmark_pos(tr.next_state, j);
        bool hit = false;
        for (int i = 0; i < 3; ++i) {
          hit = hit ||
                dist(env.layout().agent_pos(tr.next_state, i), lm) <
                    pc.agent_radius + pc.landmark_radius;
        }
        covered += hit;
      }
      if (covered > 0) {
        saw_shared = true;
        // every agent receives the same reach component; collisions subtract
        // at most 2 per agent per step here
        CHECK(covered <= 3);  // never exceeds r*N / r
        for (int i = 0; i < 3; ++i) {
          CHECK(tr.rewards[i] >= pc.rewards.cn_reach * covered + 2 * pc.rewards.cn_collision -
                                     1e-9);
          CHECK(tr.rewards[i] <= pc.rewards.cn_reach * covered + 1e-9);
        }
        break;
      }
      for (int i = 0; i < 3; ++i) CHECK(tr.rewards[i] <= 0.0 + 1e-12);
    }
  }
  CHECK(saw_shared);
}

TEST_CASE("physical deception observation structure") {
  ParticleConfig pc;
  pc.task = ParticleTask::PhysicalDeception;
  pc.n = 2;
  ParticleWorld env(pc);
  const auto rr = env.reset(11);
  CHECK(env.num_agents() == 3);
  CHECK(env.role(0) == "adversary");
  CHECK(env.role(1) == "agent");
  // the adversary observation has no target entry: two fewer components
  CHECK(rr.observations[0].size() + 2 == rr.observations[1].size());
  // good agents see the target as their first landmark entry
  const int target = env.layout().target_index(rr.state);
  const Vec2 tgt = env.layout().landmark_pos(rr.state, target);
  const Vec2 a1 = env.layout().agent_pos(rr.state, 1);
  CHECK(rr.observations[1][4] == doctest::Approx(tgt.x - a1.x));
  CHECK(rr.observations[1][5] == doctest::Approx(tgt.y - a1.y));
}

TEST_CASE("predator prey rewards and obstacles") {
  ParticleConfig pc;
  pc.task = ParticleTask::PredatorPrey;
  pc.n = 3;
  ParticleWorld env(pc);
  env.reset(12);
  CHECK(env.num_agents() == 4);
  CHECK(env.role(0) == "predator");
  CHECK(env.role(3) == "prey");

  // chase with a scripted pursuit until a collision fires
  bool collided = false;
  for (int ep = 0; ep < 40 && !collided; ++ep) {
    const auto rr = env.reset(100 + ep);
    State s = rr.state;
    while (!env.done()) {
      std::vector<Action> joint;
      const Vec2 prey = env.layout().agent_pos(s, 3);
      for (int i = 0; i < 3; ++i) {
        const Vec2 d = prey - env.layout().agent_pos(s, i);
        const double n = std::max(d.norm(), 1e-9);
        joint.push_back({d.x / n, d.y / n});
      }
      joint.push_back({0.0, 0.0});
      const auto tr = env.step(joint);
      s = tr.next_state;
      if (tr.rewards[0] > 0.0) {
        collided = true;
        CHECK(tr.rewards[0] == doctest::Approx(tr.rewards[1]));
        CHECK(tr.rewards[3] == doctest::Approx(-tr.rewards[0]));
        break;
      }
    }
  }
  CHECK(collided);

  // obstacles are impassable: no agent center ends inside one
  Rng rng(13);
  for (int ep = 0; ep < 10; ++ep) {
    env.reset(200 + ep);
    while (!env.done()) {
      std::vector<Action> joint;
      for (int i = 0; i < 4; ++i) joint.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
      const auto tr = env.step(joint);
      for (int i = 0; i < 4; ++i) {
        const double body = i == 3 ? pc.prey_radius : pc.agent_radius;
        for (int j = 0; j < 2; ++j) {
          const double gap = dist(env.layout().agent_pos(tr.next_state, i),
                                  env.layout().landmark_pos(tr.next_state, j));
          CHECK(gap >= body + pc.obstacle_radius - 1e-9);
        }
      }
    }
  }
}
