#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rv/experiment.hpp"

namespace rv {

namespace {

// East strictly beats every other action in every corridor grid.
bool corridor_policy_optimal(const QTable& q, int n) {
  for (int s = 0; s < n; ++s) {
    const double east = q.at(s, kEast);
    for (int a = 0; a < kGridActionCount; ++a) {
      if (a == kEast) continue;
      if (!(east > q.at(s, a))) return false;
    }
  }
  return true;
}

LinearRunResult run_linear_once(const LinearExperimentConfig& cfg, int n,
                                LinearStrategy strategy, std::uint64_t seed) {
  LinearRunResult result;
  result.n = n;
  result.strategy = strategy;
  result.seed = seed;

  LinearGridConfig env_cfg;
  env_cfg.n = n;
  env_cfg.gamma = cfg.gamma;
  env_cfg.goal_reward = cfg.goal_reward;

  const auto experiences = enumerate_linear_buffer(env_cfg);
  ReplayBuffer<TabExperience> buffer(experiences.size());
  for (const auto& e : experiences) buffer.push(e);

  QTable q(n + 1, kGridActionCount);
  QAgentConfig agent;
  agent.alpha = 1.0;
  agent.gamma = cfg.gamma;

  const long long cap = cfg.cap_factor * static_cast<long long>(n) * n;
  Rng rng = rng_stream(seed, 0);
  long long count = 0;
  while (count < cap) {
    std::size_t slot = 0;
    if (strategy == LinearStrategy::uniform) {
      slot = sample_uniform(buffer.size(), 1, rng)[0];
    } else {
      const auto criterion = strategy == LinearStrategy::oracle_td
                                 ? OracleCriterion::abs_td
                                 : OracleCriterion::abs_evb;
      const OraclePick pick = sample_greedy_oracle_scored(
          buffer, criterion, q, agent.alpha, agent.gamma);
      if (pick.score == 0.0) {
        result.to_quiescence = count;
        break;  // every further replay is a no-op
      }
      slot = pick.slot;
    }
    q_update(q, buffer[slot], agent);
    ++count;
    if (result.to_optimal < 0 && corridor_policy_optimal(q, n)) {
      result.to_optimal = count;
      if (strategy == LinearStrategy::uniform) break;
    }
  }
  result.converged = result.to_optimal >= 0 &&
                     (strategy == LinearStrategy::uniform ||
                      result.to_quiescence >= 0);
  return result;
}

long long parse_ll(std::string_view s, const char* what) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::runtime_error(std::string("bad ") + what + " field: '" +
                             std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

}  // namespace

std::vector<LinearRunResult> run_linear_comparison(
    const LinearExperimentConfig& cfg) {
  cfg.validate();
  std::vector<LinearRunResult> results;
  for (int n : cfg.n_values) {
    for (LinearStrategy strategy : cfg.strategies) {
      if (strategy == LinearStrategy::uniform) {
        for (int s = 1; s <= cfg.seeds_per_point; ++s) {
          results.push_back(run_linear_once(cfg, n, strategy,
                                            static_cast<std::uint64_t>(s)));
        }
      } else {
        results.push_back(run_linear_once(cfg, n, strategy, 0));
      }
    }
  }
  return results;
}

void write_linear_csv(const std::string& path,
                      std::span<const LinearRunResult> results) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "n,strategy,seed,to_optimal,to_quiescence,converged\n";
  for (const auto& r : results) {
    out << r.n << ',' << linear_strategy_name(r.strategy) << ',' << r.seed
        << ',' << r.to_optimal << ',' << r.to_quiescence << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

std::vector<LinearRunResult> read_linear_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "n,strategy,seed,to_optimal,to_quiescence,converged") {
    throw std::runtime_error("bad replay-count header in " + path);
  }
  std::vector<LinearRunResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw std::runtime_error("bad row in " + path);
    LinearRunResult r;
    r.n = static_cast<int>(parse_ll(f[0], "n"));
    r.strategy = linear_strategy_from_name(f[1]);
    r.seed = static_cast<std::uint64_t>(parse_ll(f[2], "seed"));
    r.to_optimal = parse_ll(f[3], "to_optimal");
    r.to_quiescence = parse_ll(f[4], "to_quiescence");
    r.converged = parse_ll(f[5], "converged") != 0;
    out.push_back(r);
  }
  return out;
}

RunTrace run_maze(const MazeExperimentConfig& cfg, std::uint64_t seed,
                  const RowSink& sink) {
  cfg.validate();
  MazeEnv env(cfg.maze);
  const Flavor flavor = cfg.soft ? Flavor::soft : Flavor::plain;
  const double gamma = cfg.maze.gamma;

  QTable q(env.state_count(), env.action_count());
  QAgentConfig agent;
  agent.alpha = cfg.alpha;
  agent.gamma = gamma;
  agent.epsilon = cfg.epsilon;
  SoftQAgentConfig soft_agent;
  soft_agent.beta = cfg.beta;
  soft_agent.gamma = gamma;

  Rng action_rng = rng_stream(seed, 0);
  Rng replay_rng = rng_stream(seed, 1);
  ReplayBuffer<TabExperience> buffer(
      static_cast<std::size_t>(cfg.total_steps));

  RunTrace trace;
  trace.seed = seed;
  trace.flavor = flavor;

  // Snapshot-update-diff on one experience; emits the metric row.
  QTable scratch = q;
  const auto apply_logged = [&](const TabExperience& e, long long step,
                                long long episode) {
    scratch = q;
    if (cfg.soft) {
      soft_q_update(q, e, soft_agent);
    } else {
      q_update(q, e, agent);
    }
    TraceRow row;
    row.step = step;
    row.episode = episode;
    row.state = tab_state_string(e.state);
    row.action = e.action;
    row.reward = e.reward;
    row.record = metric_record_tabular(scratch, q, e, flavor, cfg.alpha,
                                       cfg.beta, gamma);
    ++trace.rows;
    if (row.record.violation) ++trace.violations;
    sink(row);
  };

  env.reset();
  long long episode = 0;
  long long episode_len = 0;
  double episode_reward = 0.0;
  for (long long t = 0; t < cfg.total_steps; ++t) {
    const int state = env.current_state();
    const int action =
        cfg.soft ? behavior_action(q, state, BehaviorMode::softmax, cfg.beta,
                                   action_rng)
                 : behavior_action(q, state, BehaviorMode::epsilon_greedy,
                                   cfg.epsilon.at(t), action_rng);
    const Transition tr = env.step(action);
    const TabExperience e{state, action, tr.reward, tr.next_state,
                          tr.terminal};
    buffer.push(e);

    apply_logged(e, t, episode);
    for (int k = 0; k < cfg.replay_ratio; ++k) {
      const std::size_t slot = sample_uniform(buffer.size(), 1, replay_rng)[0];
      apply_logged(buffer[slot], t, episode);
      ++trace.replay_count;
    }

    episode_reward += tr.reward;
    ++episode_len;
    if (tr.terminal || episode_len >= cfg.episode_cap) {
      trace.episodes.push_back(
          {episode, episode_reward, episode_len, tr.terminal, t});
      ++episode;
      episode_len = 0;
      episode_reward = 0.0;
      env.reset();
    }
  }
  return trace;
}

namespace {

int fa_behavior_action(const MlpParams& params, const CartPoleState& s,
                       bool soft, double beta, double epsilon, Rng& rng) {
  const auto feats = s.features();
  const Eigen::VectorXd qv = forward(params, feats);
  const std::vector<double> row(qv.data(), qv.data() + qv.size());
  if (soft) {
    return static_cast<int>(rng.categorical(softmax(beta, row)));
  }
  if (rng.uniform01() < epsilon) {
    return static_cast<int>(rng.below(row.size()));
  }
  return static_cast<int>(argmax_tiebreak(row));
}

double fa_eval_mean_return(const MlpParams& params,
                           const CartPoleExperimentConfig& cfg, Rng& rng) {
  double total = 0.0;
  for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
    CartPoleEnv env(cfg.env);
    env.reset(rng);
    double ep_return = 0.0;
    while (!env.done()) {
      const int action = fa_behavior_action(params, env.state(), cfg.soft,
                                            cfg.net.beta, 0.0, rng);
      ep_return += env.step(action).reward;
    }
    total += ep_return;
  }
  return total / cfg.eval_episodes;
}

}  // namespace

RunTrace run_cartpole(const CartPoleExperimentConfig& cfg, std::uint64_t seed,
                      const RowSink& sink) {
  cfg.validate();
  const Flavor flavor = cfg.soft ? Flavor::fa_soft : Flavor::fa_plain;
  const bool prioritized = cfg.replay != ReplayStrategy::uniform;

  Rng env_rng = rng_stream(seed, 0);
  Rng action_rng = rng_stream(seed, 1);
  Rng replay_rng = rng_stream(seed, 2);
  Rng init_rng = rng_stream(seed, 3);

  const MlpShape shape{4, 256, 2};
  MlpParams params = MlpParams::init_uniform(shape, init_rng);
  MlpParams target = params;

  CartPoleEnv env(cfg.env);
  env.reset(env_rng);
  ReplayBuffer<FaExperience> buffer(
      static_cast<std::size_t>(cfg.net.buffer_capacity));
  ProportionalSampler sampler(
      static_cast<std::size_t>(cfg.net.buffer_capacity), cfg.sampler);

  RunTrace trace;
  trace.seed = seed;
  trace.flavor = flavor;

  std::vector<FaExperience> batch;
  std::vector<double> weights;
  std::vector<ProportionalSampler::Draw> draws;
  std::vector<double> bases;

  long long episode = 0;
  long long episode_len = 0;
  double episode_reward = 0.0;
  for (long long t = 0; t < cfg.net.total_steps; ++t) {
    if (cfg.net.target_sync_period > 0 &&
        t % cfg.net.target_sync_period == 0) {
      target = params;
    }

    const CartPoleState state = env.state();
    const int action = fa_behavior_action(params, state, cfg.soft,
                                          cfg.net.beta, cfg.epsilon.at(t),
                                          action_rng);
    const CartPoleEnv::Step step = env.step(action);
    const FaExperience e{state, action, step.reward, step.next, step.terminal};
    const std::size_t slot = buffer.push(e);
    if (prioritized) sampler.on_push(slot);

    episode_reward += step.reward;
    ++episode_len;
    if (step.terminal) {
      const bool survived = episode_len >= cfg.env.max_steps;
      trace.episodes.push_back(
          {episode, episode_reward, episode_len, survived, t});
      ++episode;
      episode_len = 0;
      episode_reward = 0.0;
      env.reset(env_rng);
    }

    if (buffer.size() >= static_cast<std::size_t>(cfg.net.batch)) {
      batch.clear();
      weights.clear();
      bases.clear();
      draws.clear();
      if (prioritized) {
        draws = sampler.sample(static_cast<std::size_t>(cfg.net.batch),
                               replay_rng);
        std::vector<double> probs;
        probs.reserve(draws.size());
        for (const auto& d : draws) {
          batch.push_back(buffer[d.slot]);
          probs.push_back(d.probability);
        }
        weights = is_weights(probs, buffer.size(), cfg.sampler.beta_is_at(t));
      } else {
        const auto slots = sample_uniform(
            buffer.size(), static_cast<std::size_t>(cfg.net.batch),
            replay_rng);
        for (std::size_t s : slots) batch.push_back(buffer[s]);
        weights.assign(batch.size(), 1.0);
      }

      for (std::size_t i = 0; i < batch.size(); ++i) {
        const MetricRecord rec =
            metrics_fa(params, target, batch[i], flavor, cfg.net);
        double base = -1.0;
        if (cfg.replay == ReplayStrategy::per) {
          base = std::abs(rec.td);
        } else if (cfg.replay == ReplayStrategy::ver) {
          base = rec.upper_bound;  // rho_max * |td|
        }
        bases.push_back(base);
        TraceRow row;
        row.step = t;
        row.episode = episode;
        row.state = fa_state_string(batch[i].state);
        row.action = batch[i].action;
        row.reward = batch[i].reward;
        row.record = rec;
        row.priority_base = base;
        ++trace.rows;
        if (rec.violation) ++trace.violations;
        sink(row);
      }

      sgd_minibatch_update(params, target, batch, weights, flavor, cfg.net);
      if (prioritized) {
        for (std::size_t i = 0; i < draws.size(); ++i) {
          sampler.set_base_priority(draws[i].slot, bases[i]);
        }
      }
      trace.replay_count += static_cast<long long>(batch.size());
    }

    if ((t + 1) % cfg.eval_period == 0) {
      const long long eval_idx = (t + 1) / cfg.eval_period;
      Rng eval_rng =
          rng_stream(seed, 1000 + static_cast<std::uint64_t>(eval_idx));
      trace.evals.push_back(
          {t + 1, fa_eval_mean_return(params, cfg, eval_rng)});
    }
  }
  return trace;
}

}  // namespace rv
