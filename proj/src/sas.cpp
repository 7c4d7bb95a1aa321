#include "shaping/sas.hpp"

#include <stdexcept>
#include <utility>

namespace shaping {

TDRecord sas_td_error(const SasState& state, const TransitionSample& tr,
                      const std::optional<StateActionPair>& prev_pair,
                      const std::optional<Action>& next_action, int t) {
  std::optional<StateActionPair> neighbor;
  if (state.advice.mode == AdviceMode::LookAhead) {
    if (next_action) {
      neighbor = StateActionPair{tr.next_state, {*next_action}};
    } else if (!tr.terminal) {
      throw std::invalid_argument("look-ahead advice needs the next action");
    }
  } else {
    neighbor = prev_pair;
  }
  return sam_td_error(state.agent, state.advice, t, tr, tr.observations.at(0),
                      tr.next_observations.at(0), neighbor);
}

void sas_actor_step(SasState& state, const Obs& obs, const Action& action, const TDRecord& td) {
  sam_actor_step(state.agent, obs, action, td);
}

void sas_critic_step(SasState& state, const Obs& obs, const TDRecord& td) {
  sam_critic_step(state.agent, obs, td);
}

TrainResult train_sas(EnvInterface& env, SasState& state, std::uint64_t run_seed, bool ircr) {
  if (env.num_agents() != 1) {
    throw std::invalid_argument("train_sas expects a single-agent environment");
  }
  SamConfig cfg;
  cfg.advice = state.advice;
  cfg.max_episodes = state.max_episodes;
  cfg.ircr = ircr;
  std::vector<AgentHandle> agents;
  agents.push_back(std::move(state.agent));
  TrainResult result = train_sam(env, agents, cfg, run_seed);
  state.agent = std::move(agents[0]);
  return result;
}

}  // namespace shaping
