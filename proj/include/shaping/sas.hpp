#pragma once

#include <optional>

#include "shaping/sam.hpp"

namespace shaping {

/// Single-agent advantage actor-critic with shaping advice. Implemented as
/// the 1-agent case of the multi-agent loop so the two share every code
/// path bit-for-bit.
struct SasState {
  AgentHandle agent;
  AdviceConfig advice;
  int max_episodes = 100;
};

/// TD error from one transition. `next_action` feeds look-ahead advice
/// (absent at terminal), `prev_pair` feeds look-back (absent at t=0).
TDRecord sas_td_error(const SasState& state, const TransitionSample& tr,
                      const std::optional<StateActionPair>& prev_pair,
                      const std::optional<Action>& next_action, int t = 0);

void sas_actor_step(SasState& state, const Obs& obs, const Action& action, const TDRecord& td);

void sas_critic_step(SasState& state, const Obs& obs, const TDRecord& td);

TrainResult train_sas(EnvInterface& env, SasState& state, std::uint64_t run_seed,
                      bool ircr = false);

}  // namespace shaping
