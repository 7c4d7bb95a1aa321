#include "shaping/sam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shaping {

Obs concat_observations(const std::vector<Obs>& observations) {
  Obs cat;
  std::size_t total = 0;
  for (const auto& o : observations) total += o.size();
  cat.reserve(total);
  for (const auto& o : observations) cat.insert(cat.end(), o.begin(), o.end());
  return cat;
}

TDRecord sam_td_error(const AgentHandle& agent, const AdviceConfig& advice, int t,
                      const TransitionSample& tr, const Obs& cat_obs, const Obs& cat_next_obs,
                      const std::optional<StateActionPair>& neighbor) {
  const int i = agent.index;
  const StateActionPair current{tr.state, tr.actions};
  double advice_reward = 0.0;
  if (advice.mode == AdviceMode::LookAhead) {
    if (tr.terminal) {
      advice_reward = lookahead_advice(advice, current, std::nullopt, i);
    } else {
      if (!neighbor) {
        throw std::invalid_argument("look-ahead advice needs the next joint action");
      }
      advice_reward = lookahead_advice(advice, current, neighbor, i);
    }
  } else {
    if (!neighbor && t != 0) {
      throw std::invalid_argument("look-back advice needs the previous pair after t=0");
    }
    advice_reward = lookback_advice(advice, neighbor, current, i);
  }
  const double raw = tr.rewards.at(i);
  const double bootstrap = tr.terminal ? 0.0 : agent.critic->value(cat_next_obs);
  const double delta =
      raw + advice_reward + advice.gamma * bootstrap - agent.critic->value(cat_obs);
  TDRecord td;
  td.t = t;
  td.delta = delta;
  td.correction = actor_correction(advice, current, i);
  td.shaped_reward = raw + advice_reward;
  td.raw_reward = raw;
  return td;
}

void sam_actor_step(AgentHandle& agent, const Obs& own_obs, const Action& action,
                    const TDRecord& td) {
  const Vec g = agent.policy->grad_log_prob(own_obs, action);
  agent.actor_updater.apply(agent.policy->params(), g, td.delta + td.correction);
  if (agent.projection_bound) {
    const double b = *agent.projection_bound;
    for (double& p : agent.policy->params()) p = std::clamp(p, -b, b);
  }
}

void sam_critic_step(AgentHandle& agent, const Obs& cat_obs, const TDRecord& td) {
  const auto [v, g] = agent.critic->value_and_grad(cat_obs);
  (void)v;
  agent.critic_updater.apply(agent.critic->params(), g, td.delta);
}

std::vector<double> ircr_redistribute(const std::vector<double>& step_rewards) {
  if (step_rewards.empty()) {
    throw std::invalid_argument("cannot redistribute an empty episode");
  }
  double total = 0.0;
  for (double r : step_rewards) total += r;
  return std::vector<double>(step_rewards.size(), total / step_rewards.size());
}

namespace {

struct BufferedStep {
  TransitionSample tr;
  Obs cat_obs, cat_next_obs;
};

void ircr_sweep(std::vector<AgentHandle>& agents, const SamConfig& cfg,
                const std::vector<BufferedStep>& buffer) {
  const int n = static_cast<int>(agents.size());
  const int T = static_cast<int>(buffer.size());
  std::vector<std::vector<double>> redistributed(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> rewards(T);
    for (int t = 0; t < T; ++t) rewards[t] = buffer[t].tr.rewards[i];
    redistributed[i] = ircr_redistribute(rewards);
  }
  for (int t = 0; t < T; ++t) {
    const auto& step = buffer[t];
    std::vector<TDRecord> tds(n);
    for (int i = 0; i < n; ++i) {
      const double bootstrap =
          step.tr.terminal ? 0.0 : agents[i].critic->value(step.cat_next_obs);
      TDRecord td;
      td.t = t;
      td.delta = redistributed[i][t] + cfg.advice.gamma * bootstrap -
                 agents[i].critic->value(step.cat_obs);
      td.correction = 0.0;
      td.shaped_reward = redistributed[i][t];
      td.raw_reward = step.tr.rewards[i];
      tds[i] = td;
    }
    for (int i = 0; i < n; ++i) {
      sam_actor_step(agents[i], step.tr.observations[i], step.tr.actions[i], tds[i]);
      sam_critic_step(agents[i], step.cat_obs, tds[i]);
    }
  }
}

}  // namespace

TrainResult train_sam(EnvInterface& env, std::vector<AgentHandle>& agents, const SamConfig& cfg,
                      std::uint64_t run_seed) {
  const int n = env.num_agents();
  if (static_cast<int>(agents.size()) != n) {
    throw std::invalid_argument("one agent handle per environment agent required");
  }
  cfg.advice.validate();
  if (static_cast<int>(cfg.advice.potentials.size()) != n) {
    throw std::invalid_argument("one potential per agent required");
  }
  for (int i = 0; i < n; ++i) {
    if (agents[i].index != i) throw std::invalid_argument("agent handles out of order");
    if (!agents[i].policy || !agents[i].critic) {
      throw std::invalid_argument("agent handle missing policy or critic");
    }
  }

  std::vector<Rng> agent_rng;
  agent_rng.reserve(n);
  for (int i = 0; i < n; ++i) {
    agent_rng.emplace_back(Rng::derive(Rng::derive(run_seed, 0xac7052ull), i));
  }
  const std::uint64_t env_stream = Rng::derive(run_seed, 0xe52ee4ull);

  TrainResult result;
  result.episodes.reserve(cfg.max_episodes);
  for (int ep = 0; ep < cfg.max_episodes; ++ep) {
    const std::uint64_t ep_seed = Rng::derive(env_stream, static_cast<std::uint64_t>(ep));
    ResetResult rr = env.reset(ep_seed);
    std::vector<Action> joint(n);
    for (int i = 0; i < n; ++i) joint[i] = agents[i].policy->sample(rr.observations[i], agent_rng[i]);

    EpisodeRecord rec;
    rec.episode = ep;
    rec.raw_return.assign(n, 0.0);
    rec.shaped_return.assign(n, 0.0);

    std::vector<BufferedStep> buffer;
    std::optional<StateActionPair> prev_pair;
    int t = 0;
    while (true) {
      TransitionSample tr = env.step(joint);
      const bool episode_over = tr.terminal || env.done();

      // next actions are sampled before any update in every advice mode
      std::vector<Action> next_joint(n);
      if (!tr.terminal) {
        for (int i = 0; i < n; ++i) {
          next_joint[i] = agents[i].policy->sample(tr.next_observations[i], agent_rng[i]);
        }
      }

      Obs cat_obs = concat_observations(tr.observations);
      Obs cat_next_obs = concat_observations(tr.next_observations);

      if (cfg.ircr) {
        for (int i = 0; i < n; ++i) rec.raw_return[i] += tr.rewards[i];
        buffer.push_back({std::move(tr), std::move(cat_obs), std::move(cat_next_obs)});
        prev_pair = StateActionPair{buffer.back().tr.state, buffer.back().tr.actions};
      } else {
        const std::optional<StateActionPair> lookahead_neighbor =
            tr.terminal ? std::nullopt
                        : std::make_optional(StateActionPair{tr.next_state, next_joint});
        std::vector<TDRecord> tds(n);
        for (int i = 0; i < n; ++i) {
          const auto& neighbor =
              cfg.advice.mode == AdviceMode::LookAhead ? lookahead_neighbor : prev_pair;
          tds[i] = sam_td_error(agents[i], cfg.advice, t, tr, cat_obs, cat_next_obs, neighbor);
        }
        for (int i = 0; i < n; ++i) {
          sam_actor_step(agents[i], tr.observations[i], tr.actions[i], tds[i]);
          sam_critic_step(agents[i], cat_obs, tds[i]);
          rec.raw_return[i] += tds[i].raw_reward;
          rec.shaped_return[i] += tds[i].shaped_reward;
        }
        prev_pair = StateActionPair{tr.state, tr.actions};
      }

      ++t;
      if (episode_over) break;
      joint = std::move(next_joint);
    }
    rec.steps = t;
    rec.success = env.episode_success();

    if (cfg.ircr) {
      ircr_sweep(agents, cfg, buffer);
      rec.shaped_return = rec.raw_return;  // redistribution preserves totals
    }
    result.episodes.push_back(std::move(rec));
  }
  return result;
}

}  // namespace shaping
