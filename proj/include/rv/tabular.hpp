#pragma once
// Tabular Q-learning and soft Q-learning: TD errors, update rules, behavior
// policies, and the exponential exploration schedule.

#include <span>
#include <vector>

#include "rv/env.hpp"
#include "rv/numerics.hpp"

namespace rv {

struct QTable {
  int state_count = 0;
  int action_count = 0;
  std::vector<double> values;  // row-major [state * action_count + action]

  QTable() = default;
  QTable(int states, int actions)
      : state_count(states),
        action_count(actions),
        values(static_cast<std::size_t>(states) * actions, 0.0) {}

  double at(int s, int a) const {
    return values[static_cast<std::size_t>(s) * action_count + a];
  }
  double& at(int s, int a) {
    return values[static_cast<std::size_t>(s) * action_count + a];
  }
  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * action_count,
            static_cast<std::size_t>(action_count)};
  }
  std::span<double> row(int s) {
    return {values.data() + static_cast<std::size_t>(s) * action_count,
            static_cast<std::size_t>(action_count)};
  }
};

// Exponential decay from start to end over horizon steps, constant afterward.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  long long horizon = 10000;

  double at(long long t) const;
  void validate() const;  // throws std::invalid_argument
};

struct QAgentConfig {
  double alpha = 1.0;   // step size, (0,1]
  double gamma = 0.99;  // discount, [0,1]
  EpsilonSchedule epsilon;

  void validate() const;
};

struct SoftQAgentConfig {
  double beta = 1.0;  // temperature, > 0
  double gamma = 0.99;

  void validate() const;
};

double max_q(const QTable& q, int state);

// r + gamma * max_a' Q(s',a') - Q(s,a); terminal drops the bootstrap term.
double td_error(const QTable& q, const TabExperience& e, double gamma);

// Q(s,a) += alpha * td. Returns the TD used, for logging.
double q_update(QTable& q, const TabExperience& e, const QAgentConfig& cfg);

// beta * log sum_a exp(Q(state,a) / beta).
double soft_value(const QTable& q, int state, double beta);

// r + gamma * soft_value(s') - Q(s,a); terminal drops the bootstrap term.
double soft_td_error(const QTable& q, const TabExperience& e, double beta,
                     double gamma);

// Full replacement: Q(s,a) <- r + gamma * soft_value_old(s'). Returns the TD.
double soft_q_update(QTable& q, const TabExperience& e,
                     const SoftQAgentConfig& cfg);

enum class BehaviorMode { epsilon_greedy, softmax };

// epsilon_greedy: param is the exploration rate; softmax: param is the
// temperature of the sampling policy.
int behavior_action(const QTable& q, int state, BehaviorMode mode, double param,
                    Rng& rng);

}  // namespace rv
