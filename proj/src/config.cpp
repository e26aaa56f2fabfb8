#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rv/experiment.hpp"

namespace rv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context) {
  if (!j.is_object()) fail(std::string(context) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key '" + item.key() + "' in " + context);
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

long long get_integer(const json& j, const char* key, long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) {
    fail(std::string("'") + key + "' must be an integer");
  }
  return j[key].get<long long>();
}

std::string get_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    fail(std::string("'") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::vector<std::uint64_t> get_seeds(const json& j, const char* key,
                                     std::vector<std::uint64_t> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array()) fail(std::string("'") + key + "' must be an array");
  std::vector<std::uint64_t> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      fail(std::string("'") + key + "' entries must be integers");
    }
    const long long s = v.get<long long>();
    if (s < 0) fail(std::string("'") + key + "' entries must be nonnegative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

EpsilonSchedule parse_epsilon(const json& j, EpsilonSchedule fallback) {
  if (!j.contains("epsilon")) return fallback;
  const json& e = j["epsilon"];
  require_keys(e, {"start", "end", "horizon"}, "epsilon");
  EpsilonSchedule s = fallback;
  s.start = get_number(e, "start", s.start);
  s.end = get_number(e, "end", s.end);
  s.horizon = get_integer(e, "horizon", s.horizon);
  return s;
}

MazeConfig parse_maze(const json& j) {
  MazeConfig maze = MazeConfig::default_layout();
  if (!j.contains("maze")) return maze;
  const json& m = j["maze"];
  require_keys(m,
               {"width", "height", "walls", "goals", "step_reward",
                "goal_reward"},
               "maze");
  maze.width = static_cast<int>(get_integer(m, "width", maze.width));
  maze.height = static_cast<int>(get_integer(m, "height", maze.height));
  maze.step_reward = get_number(m, "step_reward", maze.step_reward);
  maze.goal_reward = get_number(m, "goal_reward", maze.goal_reward);
  if (m.contains("walls")) {
    if (!m["walls"].is_array()) fail("'walls' must be an array");
    maze.walls.clear();
    for (const auto& w : m["walls"]) {
      if (!w.is_array() || w.size() != 4) {
        fail("each wall must be [r1, c1, r2, c2]");
      }
      maze.walls.push_back({w[0].get<int>(), w[1].get<int>(), w[2].get<int>(),
                            w[3].get<int>()});
    }
  }
  if (m.contains("goals")) {
    if (!m["goals"].is_array()) fail("'goals' must be an array");
    maze.goal_cells.clear();
    for (const auto& g : m["goals"]) maze.goal_cells.push_back(g.get<int>());
  }
  return maze;
}

LinearExperimentConfig parse_linear(const json& j) {
  require_keys(j,
               {"kind", "n_values", "strategies", "seeds_per_point", "gamma",
                "goal_reward", "cap_factor"},
               "linear config");
  LinearExperimentConfig cfg;
  if (j.contains("n_values")) {
    cfg.n_values.clear();
    for (const auto& v : j["n_values"]) {
      cfg.n_values.push_back(v.get<int>());
    }
  }
  if (j.contains("strategies")) {
    cfg.strategies.clear();
    for (const auto& v : j["strategies"]) {
      cfg.strategies.push_back(
          linear_strategy_from_name(v.get<std::string>()));
    }
  }
  cfg.seeds_per_point =
      static_cast<int>(get_integer(j, "seeds_per_point", cfg.seeds_per_point));
  cfg.gamma = get_number(j, "gamma", cfg.gamma);
  cfg.goal_reward = get_number(j, "goal_reward", cfg.goal_reward);
  cfg.cap_factor = get_integer(j, "cap_factor", cfg.cap_factor);
  cfg.validate();
  return cfg;
}

MazeExperimentConfig parse_maze_experiment(const json& j) {
  require_keys(j,
               {"kind", "flavor", "alpha", "beta", "gamma", "epsilon",
                "total_steps", "episode_cap", "replay_ratio", "seeds", "maze"},
               "maze config");
  MazeExperimentConfig cfg;
  const std::string flavor = get_string(j, "flavor");
  if (flavor == "q") {
    cfg.soft = false;
  } else if (flavor == "soft") {
    cfg.soft = true;
  } else {
    fail("maze 'flavor' must be 'q' or 'soft'");
  }
  cfg.maze = parse_maze(j);
  cfg.maze.gamma = get_number(j, "gamma", cfg.maze.gamma);
  cfg.alpha = get_number(j, "alpha", cfg.alpha);
  cfg.beta = get_number(j, "beta", cfg.beta);
  cfg.epsilon = parse_epsilon(j, cfg.epsilon);
  cfg.total_steps = get_integer(j, "total_steps", cfg.total_steps);
  cfg.episode_cap = get_integer(j, "episode_cap", cfg.episode_cap);
  cfg.replay_ratio =
      static_cast<int>(get_integer(j, "replay_ratio", cfg.replay_ratio));
  cfg.seeds = get_seeds(j, "seeds", {});
  cfg.validate();
  return cfg;
}

CartPoleExperimentConfig parse_cartpole(const json& j) {
  require_keys(j,
               {"kind", "flavor", "replay", "learning_rate", "gamma", "batch",
                "buffer_capacity", "total_steps", "beta",
                "target_sync_period", "epsilon", "eval_period",
                "eval_episodes", "sampler", "seeds"},
               "cartpole config");
  CartPoleExperimentConfig cfg;
  const std::string flavor = get_string(j, "flavor");
  if (flavor == "dqn") {
    cfg.soft = false;
  } else if (flavor == "soft_dqn") {
    cfg.soft = true;
  } else {
    fail("cartpole 'flavor' must be 'dqn' or 'soft_dqn'");
  }
  if (j.contains("replay")) {
    cfg.replay = replay_strategy_from_name(get_string(j, "replay"));
  }
  cfg.net.learning_rate = get_number(j, "learning_rate", cfg.net.learning_rate);
  cfg.net.gamma = get_number(j, "gamma", cfg.net.gamma);
  cfg.net.batch = static_cast<int>(get_integer(j, "batch", cfg.net.batch));
  cfg.net.buffer_capacity = static_cast<int>(
      get_integer(j, "buffer_capacity", cfg.net.buffer_capacity));
  cfg.net.total_steps = get_integer(j, "total_steps", cfg.net.total_steps);
  cfg.net.beta = get_number(j, "beta", cfg.net.beta);
  cfg.net.target_sync_period =
      get_integer(j, "target_sync_period", cfg.net.target_sync_period);
  cfg.epsilon = parse_epsilon(j, cfg.epsilon);
  cfg.eval_period = get_integer(j, "eval_period", cfg.eval_period);
  cfg.eval_episodes =
      static_cast<int>(get_integer(j, "eval_episodes", cfg.eval_episodes));
  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    require_keys(s,
                 {"alpha_exp", "epsilon_prio", "beta_is", "beta_is_start",
                  "beta_is_end"},
                 "sampler");
    cfg.sampler.alpha_exp = get_number(s, "alpha_exp", cfg.sampler.alpha_exp);
    cfg.sampler.epsilon_prio =
        get_number(s, "epsilon_prio", cfg.sampler.epsilon_prio);
    if (s.contains("beta_is")) {
      // A bare beta_is pins a constant exponent; start/end override it.
      cfg.sampler.beta_is = get_number(s, "beta_is", cfg.sampler.beta_is);
      cfg.sampler.beta_is_schedule.start = cfg.sampler.beta_is;
      cfg.sampler.beta_is_schedule.end = cfg.sampler.beta_is;
    }
    cfg.sampler.beta_is_schedule.start =
        get_number(s, "beta_is_start", cfg.sampler.beta_is_schedule.start);
    cfg.sampler.beta_is_schedule.end =
        get_number(s, "beta_is_end", cfg.sampler.beta_is_schedule.end);
  }
  cfg.sampler.beta_is_schedule.horizon = cfg.net.total_steps;
  cfg.seeds = get_seeds(j, "seeds", cfg.seeds);
  cfg.validate();
  return cfg;
}

AtariStubConfig parse_atari(const json& j) {
  require_keys(j, {"kind", "note", "alpha_is", "beta_is", "beta"},
               "atari config");
  AtariStubConfig cfg;
  if (j.contains("note")) cfg.note = get_string(j, "note");
  cfg.alpha_is = get_number(j, "alpha_is", cfg.alpha_is);
  cfg.beta_is = get_number(j, "beta_is", cfg.beta_is);
  cfg.beta = get_number(j, "beta", cfg.beta);
  return cfg;
}

}  // namespace

std::string_view replay_strategy_name(ReplayStrategy s) {
  switch (s) {
    case ReplayStrategy::uniform: return "uniform";
    case ReplayStrategy::per: return "per";
    case ReplayStrategy::ver: return "ver";
  }
  throw std::logic_error("unreachable replay strategy");
}

ReplayStrategy replay_strategy_from_name(std::string_view name) {
  if (name == "uniform") return ReplayStrategy::uniform;
  if (name == "per") return ReplayStrategy::per;
  if (name == "ver") return ReplayStrategy::ver;
  fail("unknown replay strategy: '" + std::string(name) + "'");
}

std::string_view linear_strategy_name(LinearStrategy s) {
  switch (s) {
    case LinearStrategy::uniform: return "uniform";
    case LinearStrategy::oracle_td: return "oracle_td";
    case LinearStrategy::oracle_evb: return "oracle_evb";
  }
  throw std::logic_error("unreachable linear strategy");
}

LinearStrategy linear_strategy_from_name(std::string_view name) {
  if (name == "uniform") return LinearStrategy::uniform;
  if (name == "oracle_td") return LinearStrategy::oracle_td;
  if (name == "oracle_evb") return LinearStrategy::oracle_evb;
  fail("unknown linear strategy: '" + std::string(name) + "'");
}

void LinearExperimentConfig::validate() const {
  if (n_values.empty()) fail("n_values must be nonempty");
  for (int n : n_values) {
    if (n < 2) fail("every n must be >= 2");
  }
  if (strategies.empty()) fail("strategies must be nonempty");
  if (seeds_per_point < 1) fail("seeds_per_point must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0,1)");
  if (cap_factor < 1) fail("cap_factor must be positive");
}

void MazeExperimentConfig::validate() const {
  try {
    MazeEnv probe(maze);  // full layout validation
    (void)probe;
    if (soft) {
      SoftQAgentConfig{beta, maze.gamma}.validate();
    } else {
      QAgentConfig agent;
      agent.alpha = alpha;
      agent.gamma = maze.gamma;
      agent.epsilon = epsilon;
      agent.validate();
    }
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (total_steps < 1) fail("total_steps must be positive");
  if (episode_cap < 1) fail("episode_cap must be positive");
  if (replay_ratio < 0) fail("replay_ratio must be >= 0");
  if (seeds.empty()) fail("seeds must be nonempty");
}

void CartPoleExperimentConfig::validate() const {
  try {
    net.validate();
    epsilon.validate();
    sampler.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (eval_period < 1) fail("eval_period must be positive");
  if (eval_episodes < 1) fail("eval_episodes must be positive");
  if (replay == ReplayStrategy::ver && !soft) {
    fail("ver replay requires the soft_dqn flavor");
  }
  if (seeds.empty()) fail("seeds must be nonempty");
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config must be a JSON object");
  const std::string kind = get_string(j, "kind");
  ExperimentConfig cfg;
  if (kind == "linear") {
    cfg.spec = parse_linear(j);
  } else if (kind == "maze") {
    cfg.spec = parse_maze_experiment(j);
  } else if (kind == "cartpole") {
    cfg.spec = parse_cartpole(j);
  } else if (kind == "atari") {
    cfg.spec = parse_atari(j);
  } else {
    fail("unknown experiment kind: '" + kind + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace rv
