#include "rv/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace rv {

namespace {

double plain_target(const QTable& q, const TabExperience& e, double gamma) {
  return e.terminal ? e.reward : e.reward + gamma * max_q(q, e.next_state);
}

double soft_target(const QTable& q, const TabExperience& e, double beta,
                   double gamma) {
  return e.terminal ? e.reward
                    : e.reward + gamma * soft_value(q, e.next_state, beta);
}

}  // namespace

double EpsilonSchedule::at(long long t) const {
  if (t >= horizon) return end;
  if (t <= 0) return start;
  const double frac = static_cast<double>(t) / static_cast<double>(horizon);
  return start * std::exp(std::log(end / start) * frac);
}

void EpsilonSchedule::validate() const {
  if (!(end > 0.0) || !(start >= end) || start > 1.0)
    throw std::invalid_argument("epsilon schedule needs 0 < end <= start <= 1");
  if (horizon < 1) throw std::invalid_argument("epsilon horizon must be >= 1");
}

void QAgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must be in (0,1]");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must be in [0,1]");
  epsilon.validate();
}

void SoftQAgentConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must be in [0,1]");
}

double max_q(const QTable& q, int state) { return max_value(q.row(state)); }

double td_error(const QTable& q, const TabExperience& e, double gamma) {
  return plain_target(q, e, gamma) - q.at(e.state, e.action);
}

double q_update(QTable& q, const TabExperience& e, const QAgentConfig& cfg) {
  const double td = td_error(q, e, cfg.gamma);
  q.at(e.state, e.action) += cfg.alpha * td;
  return td;
}

double soft_value(const QTable& q, int state, double beta) {
  return logsumexp(beta, q.row(state));
}

double soft_td_error(const QTable& q, const TabExperience& e, double beta,
                     double gamma) {
  return soft_target(q, e, beta, gamma) - q.at(e.state, e.action);
}

double soft_q_update(QTable& q, const TabExperience& e,
                     const SoftQAgentConfig& cfg) {
  const double target = soft_target(q, e, cfg.beta, cfg.gamma);
  const double td = target - q.at(e.state, e.action);
  q.at(e.state, e.action) = target;  // replacement, no step-size blending
  return td;
}

int behavior_action(const QTable& q, int state, BehaviorMode mode, double param,
                    Rng& rng) {
  switch (mode) {
    case BehaviorMode::epsilon_greedy:
      if (rng.uniform01() < param)
        return static_cast<int>(rng.below(q.action_count));
      return static_cast<int>(argmax_tiebreak(q.row(state)));
    case BehaviorMode::softmax: {
      const auto probs = softmax(param, q.row(state));
      return static_cast<int>(rng.categorical(probs));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace rv
