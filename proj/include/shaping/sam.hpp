#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "shaping/advice.hpp"
#include "shaping/approx.hpp"
#include "shaping/core.hpp"

namespace shaping {

/// One TD update record. shaped_reward == raw_reward + F always holds.
struct TDRecord {
  int t = 0;
  double delta = 0.0;
  double correction = 0.0;
  double shaped_reward = 0.0;
  double raw_reward = 0.0;
};

/// Actor over the agent's own observation, critic over the concatenation
/// of everyone's observations, plus the update machinery and the optional
/// projection box for the policy parameters.
struct AgentHandle {
  int index = 0;
  std::shared_ptr<Policy> policy;
  std::shared_ptr<ValueFunction> critic;
  ParamUpdater actor_updater{UpdateRule{}};
  ParamUpdater critic_updater{UpdateRule{}};
  std::optional<double> projection_bound;  // clip box half-width; identity if absent
};

struct SamConfig {
  AdviceConfig advice;  // per-agent potentials, mode, gamma
  int max_episodes = 100;
  bool ircr = false;  // redistribute episode rewards uniformly before updating
};

struct EpisodeRecord {
  int episode = 0;
  std::vector<double> raw_return;     // per agent, environment rewards only
  std::vector<double> shaped_return;  // per agent, training-signal returns
  int steps = 0;
  bool success = false;
};

struct TrainResult {
  std::vector<EpisodeRecord> episodes;
};

Obs concat_observations(const std::vector<Obs>& observations);

/// TD error for one agent at step t. `neighbor` carries the next joint
/// state-action pair under look-ahead advice (disengaged at terminal), or
/// the previous pair under look-back (disengaged at t=0 per the zero
/// sentinel). Missing a required neighbor is an error.
TDRecord sam_td_error(const AgentHandle& agent, const AdviceConfig& advice, int t,
                      const TransitionSample& tr, const Obs& cat_obs, const Obs& cat_next_obs,
                      const std::optional<StateActionPair>& neighbor);

/// theta_i <- Gamma_i[theta_i + alpha (delta + correction) grad log pi].
void sam_actor_step(AgentHandle& agent, const Obs& own_obs, const Action& action,
                    const TDRecord& td);

/// omega_i <- omega_i + alpha delta grad V(cat_obs).
void sam_critic_step(AgentHandle& agent, const Obs& cat_obs, const TDRecord& td);

/// Full synchronous training loop. All agents sample, then all TD records
/// are computed from the pre-update snapshot, then updates apply in index
/// order. Next actions are sampled right after observing the next state in
/// every mode, so zero-potential runs coincide bit-for-bit across modes.
TrainResult train_sam(EnvInterface& env, std::vector<AgentHandle>& agents, const SamConfig& cfg,
                      std::uint64_t run_seed);

/// Uniform redistribution of an episode's rewards: every step gets the
/// episode total divided by the episode length. Throws on empty input.
std::vector<double> ircr_redistribute(const std::vector<double>& step_rewards);

}  // namespace shaping
