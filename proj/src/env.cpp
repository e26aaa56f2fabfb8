#include "rv/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace rv {

//----------------------------------------------------------------------------
// LinearGridEnv

LinearGridEnv::LinearGridEnv(LinearGridConfig cfg) : cfg_(cfg) {
  if (cfg_.n < 2) throw std::invalid_argument("linear grid needs n >= 2");
  if (!(cfg_.gamma >= 0.0 && cfg_.gamma < 1.0))
    throw std::invalid_argument("linear grid gamma must be in [0,1)");
}

Transition LinearGridEnv::transition(int state, int action) const {
  if (state < 0 || state >= cfg_.n)
    throw std::logic_error("stepping a terminal or invalid state");
  if (action < 0 || action >= kGridActionCount)
    throw std::invalid_argument("bad action");
  switch (action) {
    case kEast:
      if (state == cfg_.n - 1) return {goal_state(), cfg_.goal_reward, true};
      return {state + 1, 0.0, false};
    case kWest:
      return {state > 0 ? state - 1 : 0, 0.0, false};
    default:  // north/south are no-ops on the corridor
      return {state, 0.0, false};
  }
}

int LinearGridEnv::reset() {
  state_ = 0;
  done_ = false;
  return state_;
}

Transition LinearGridEnv::step(int action) {
  if (done_) throw std::logic_error("stepping a finished episode");
  Transition t = transition(state_, action);
  state_ = t.next_state;
  done_ = t.terminal;
  return t;
}

std::vector<TabExperience> enumerate_linear_buffer(
    const LinearGridConfig& cfg) {
  LinearGridEnv env(cfg);
  std::vector<TabExperience> buf;
  buf.reserve(static_cast<std::size_t>(cfg.n) * kGridActionCount);
  for (int s = 0; s < cfg.n; ++s)
    for (int a = 0; a < kGridActionCount; ++a) {
      Transition t = env.transition(s, a);
      buf.push_back({s, a, t.reward, t.next_state, t.terminal});
    }
  return buf;
}

//----------------------------------------------------------------------------
// MazeEnv

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

MazeConfig MazeConfig::default_layout() {
  MazeConfig cfg;
  // Barrier between rows 1|2 spanning columns 0..3 (gap at the right edge),
  // and between rows 3|4 spanning columns 3..4 (gap on the left half).
  for (int c = 0; c <= 3; ++c) cfg.walls.push_back({1, c, 2, c});
  for (int c = 3; c <= 4; ++c) cfg.walls.push_back({3, c, 4, c});
  cfg.goal_cells = {24};  // bottom-right of the 5x5 grid
  return cfg;
}

MazeEnv::MazeEnv(MazeConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.width < 2 || cfg_.height < 2)
    throw std::invalid_argument("maze must be at least 2x2");
  const int n = state_count();
  if (cfg_.goal_cells.empty()) throw std::invalid_argument("maze needs a goal");
  goal_mask_.assign(n, 0);
  for (int g : cfg_.goal_cells) {
    if (g < 0 || g >= n) throw std::invalid_argument("goal cell out of range");
    goal_mask_[g] = 1;
  }
  if (goal_mask_[start_state()])
    throw std::invalid_argument("start cell must not be a goal");
  for (const WallEdge& w : cfg_.walls) {
    const bool in_bounds = w.r1 >= 0 && w.r1 < cfg_.height && w.r2 >= 0 &&
                           w.r2 < cfg_.height && w.c1 >= 0 &&
                           w.c1 < cfg_.width && w.c2 >= 0 && w.c2 < cfg_.width;
    if (!in_bounds) throw std::invalid_argument("wall cell out of range");
    if (std::abs(w.r1 - w.r2) + std::abs(w.c1 - w.c2) != 1)
      throw std::invalid_argument("wall must join two adjacent cells");
    const int a = w.r1 * cfg_.width + w.c1;
    const int b = w.r2 * cfg_.width + w.c2;
    blocked_edges_.push_back(edge_key(a, b));
    blocked_edges_.push_back(edge_key(b, a));
  }
  std::sort(blocked_edges_.begin(), blocked_edges_.end());
  blocked_edges_.erase(
      std::unique(blocked_edges_.begin(), blocked_edges_.end()),
      blocked_edges_.end());
  if (shortest_path_length() < 0)
    throw std::invalid_argument("maze goal unreachable from start");
}

bool MazeEnv::is_goal(int state) const {
  return state >= 0 && state < state_count() && goal_mask_[state] != 0;
}

bool MazeEnv::blocked(int r1, int c1, int r2, int c2) const {
  const int a = r1 * cfg_.width + c1;
  const int b = r2 * cfg_.width + c2;
  return std::binary_search(blocked_edges_.begin(), blocked_edges_.end(),
                            edge_key(a, b));
}

Transition MazeEnv::transition(int state, int action) const {
  if (state < 0 || state >= state_count() || is_goal(state))
    throw std::logic_error("stepping a terminal or invalid state");
  if (action < 0 || action >= kGridActionCount)
    throw std::invalid_argument("bad action");
  const int r = state / cfg_.width;
  const int c = state % cfg_.width;
  int tr = r, tc = c;
  switch (action) {
    case kNorth: tr = r - 1; break;
    case kSouth: tr = r + 1; break;
    case kEast:  tc = c + 1; break;
    case kWest:  tc = c - 1; break;
  }
  const bool off_grid = tr < 0 || tr >= cfg_.height || tc < 0 || tc >= cfg_.width;
  if (off_grid || blocked(r, c, tr, tc))
    return {state, cfg_.step_reward, false};  // blocked moves stay in place
  const int next = tr * cfg_.width + tc;
  if (goal_mask_[next]) return {next, cfg_.goal_reward, true};
  return {next, cfg_.step_reward, false};
}

int MazeEnv::reset() {
  state_ = start_state();
  done_ = false;
  return state_;
}

Transition MazeEnv::step(int action) {
  if (done_) throw std::logic_error("stepping a finished episode");
  Transition t = transition(state_, action);
  state_ = t.next_state;
  done_ = t.terminal;
  return t;
}

int MazeEnv::shortest_path_length() const {
  std::vector<int> dist(state_count(), -1);
  std::deque<int> queue;
  dist[start_state()] = 0;
  queue.push_back(start_state());
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    if (goal_mask_[s]) return dist[s];
    const int r = s / cfg_.width, c = s % cfg_.width;
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int tr = r + dr[k], tc = c + dc[k];
      if (tr < 0 || tr >= cfg_.height || tc < 0 || tc >= cfg_.width) continue;
      if (blocked(r, c, tr, tc)) continue;
      const int t = tr * cfg_.width + tc;
      if (dist[t] < 0) {
        dist[t] = dist[s] + 1;
        queue.push_back(t);
      }
    }
  }
  return -1;
}

//----------------------------------------------------------------------------
// CartPoleEnv

CartPoleEnv::CartPoleEnv(CartPoleConfig cfg) : cfg_(cfg) {
  if (cfg_.max_steps <= 0) throw std::invalid_argument("max_steps must be > 0");
}

CartPoleState CartPoleEnv::integrate(const CartPoleState& s, int action,
                                     const CartPoleConfig& cfg) {
  if (action != 0 && action != 1) throw std::invalid_argument("bad action");
  const double force = action == 1 ? cfg.force_magnitude : -cfg.force_magnitude;
  const double total_mass = cfg.cart_mass + cfg.pole_mass;
  const double pole_mass_length = cfg.pole_mass * cfg.half_pole_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp =
      (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_t) /
      total_mass;
  const double theta_acc =
      (cfg.gravity * sin_t - cos_t * temp) /
      (cfg.half_pole_length *
       (4.0 / 3.0 - cfg.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  CartPoleState n;
  n.x = s.x + cfg.timestep * s.x_dot;
  n.x_dot = s.x_dot + cfg.timestep * x_acc;
  n.theta = s.theta + cfg.timestep * s.theta_dot;
  n.theta_dot = s.theta_dot + cfg.timestep * theta_acc;
  return n;
}

bool CartPoleEnv::fallen(const CartPoleState& s) const {
  return std::abs(s.x) > cfg_.position_limit ||
         std::abs(s.theta) > cfg_.angle_limit;
}

CartPoleState CartPoleEnv::reset(Rng& rng) {
  state_.x = rng.uniform(-cfg_.reset_range, cfg_.reset_range);
  state_.x_dot = rng.uniform(-cfg_.reset_range, cfg_.reset_range);
  state_.theta = rng.uniform(-cfg_.reset_range, cfg_.reset_range);
  state_.theta_dot = rng.uniform(-cfg_.reset_range, cfg_.reset_range);
  steps_ = 0;
  done_ = false;
  return state_;
}

CartPoleEnv::Step CartPoleEnv::step(int action) {
  if (done_) throw std::logic_error("stepping a finished episode");
  state_ = integrate(state_, action, cfg_);
  ++steps_;
  const bool out = fallen(state_);
  const bool capped = steps_ >= cfg_.max_steps;
  done_ = out || capped;
  return {state_, 1.0, done_};
}

}  // namespace rv
