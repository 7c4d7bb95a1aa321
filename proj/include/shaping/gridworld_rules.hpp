#pragma once

#include <cstdlib>

namespace shaping {

// Puddle-jump gridworld geometry. 10x10 grid, start (0,0), goal (9,9),
// puddle along row y=2 which cardinal moves cannot enter (the only way
// across is the jump action between rows 1 and 3).
namespace gridworld {

inline constexpr int kWidth = 10;
inline constexpr int kHeight = 10;
inline constexpr int kGoalX = 9;
inline constexpr int kGoalY = 9;
inline constexpr int kPuddleRow = 2;
inline constexpr int kNumActions = 5;

enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kJump = 4 };

/// Destination of `action` from (x, y) assuming the jump succeeds.
/// Blocked moves (off-grid, into the puddle row, jump away from rows 1/3)
/// leave the position unchanged.
inline void move_dest(int x, int y, int action, int* nx, int* ny) {
  *nx = x;
  *ny = y;
  switch (action) {
    case kUp: *ny = y + 1; break;
    case kDown: *ny = y - 1; break;
    case kLeft: *nx = x - 1; break;
    case kRight: *nx = x + 1; break;
    case kJump:
      if (y == 1) *ny = 3;
      if (y == 3) *ny = 1;
      break;
    default: break;
  }
  if (*nx < 0 || *nx >= kWidth || *ny < 0 || *ny >= kHeight || *ny == kPuddleRow) {
    *nx = x;
    *ny = y;
  }
}

inline int l1_to_goal(int x, int y) {
  return std::abs(kGoalX - x) + std::abs(kGoalY - y);
}

/// Observation ids: states map injectively except (9,8) and (8,9), which
/// are indistinguishable and share one id. 99 ids for 100 states.
inline int observation_id(int x, int y) {
  const int raw = y * kWidth + x;
  if (raw == 98) return 89;  // (8,9) aliases with (9,8)
  if (raw == 99) return 98;  // goal shifts down to keep ids contiguous
  return raw;
}

inline constexpr int kNumObservations = 99;

}  // namespace gridworld
}  // namespace shaping
