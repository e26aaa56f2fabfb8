#pragma once
// Evaluation environments: a 1-D corridor grid, a walled 5x5 maze, and the
// classic cart-pole. Grid worlds expose pure deterministic transitions plus a
// thin episodic facade; cart-pole is stateful (step counter owns the cap).

#include <array>
#include <cstdint>
#include <vector>

#include "rv/numerics.hpp"

namespace rv {

// One logged interaction. S is an int state id for tabular environments or a
// CartPoleState for the feature-vector environment.
template <class S>
struct Experience {
  S state{};
  int action = 0;
  double reward = 0.0;
  S next_state{};
  bool terminal = false;
};

using TabExperience = Experience<int>;

struct Transition {
  int next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

enum GridAction : int { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };
inline constexpr int kGridActionCount = 4;

//----------------------------------------------------------------------------
// Linear corridor: grids 0..n-1, goal entered by moving east from grid n-1.
// North/south (and west at grid 0) keep the agent in place with reward 0.

struct LinearGridConfig {
  int n = 5;  // >= 2
  double gamma = 0.99;
  double goal_reward = 1.0;
};

class LinearGridEnv {
 public:
  explicit LinearGridEnv(LinearGridConfig cfg);

  int action_count() const { return kGridActionCount; }
  // Grids plus one absorbing goal state (id n) so every Experience holds
  // valid state ids; the goal row is never updated.
  int state_count() const { return cfg_.n + 1; }
  int goal_state() const { return cfg_.n; }
  const LinearGridConfig& config() const { return cfg_; }

  Transition transition(int state, int action) const;

  int reset();
  Transition step(int action);
  int current_state() const { return state_; }

 private:
  LinearGridConfig cfg_;
  int state_ = 0;
  bool done_ = false;
};

// All 4N (state, action) pairs once, transitions taken from the environment.
std::vector<TabExperience> enumerate_linear_buffer(const LinearGridConfig& cfg);

//----------------------------------------------------------------------------
// Maze: width x height cells, ids row-major, start top-left, goal cells
// terminal. Moves into a wall or the border keep the agent in place.

struct WallEdge {
  int r1 = 0, c1 = 0, r2 = 0, c2 = 0;  // blocked in both directions
};

struct MazeConfig {
  int width = 5;
  int height = 5;
  std::vector<WallEdge> walls;
  std::vector<int> goal_cells;  // state ids
  double step_reward = -0.004;
  double goal_reward = 1.0;
  double gamma = 0.99;

  // Two interior barriers; shortest start-to-goal path has length 12.
  static MazeConfig default_layout();
};

class MazeEnv {
 public:
  explicit MazeEnv(MazeConfig cfg);  // validates; throws std::invalid_argument

  int action_count() const { return kGridActionCount; }
  int state_count() const { return cfg_.width * cfg_.height; }
  int start_state() const { return 0; }
  bool is_goal(int state) const;
  const MazeConfig& config() const { return cfg_; }

  Transition transition(int state, int action) const;

  int reset();
  Transition step(int action);
  int current_state() const { return state_; }

  // Shortest path length from start to the nearest goal cell (BFS), walls
  // respected. Used for config validation and tests.
  int shortest_path_length() const;

 private:
  bool blocked(int r1, int c1, int r2, int c2) const;

  MazeConfig cfg_;
  std::vector<std::uint8_t> goal_mask_;
  std::vector<std::uint64_t> blocked_edges_;  // sorted keys, both directions
  int state_ = 0;
  bool done_ = false;
};

//----------------------------------------------------------------------------
// Classic cart-pole, Euler-integrated at 0.02 s with force +-10 N.

struct CartPoleConfig {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_pole_length = 0.5;
  double force_magnitude = 10.0;
  double timestep = 0.02;
  double angle_limit = 12.0 * 3.14159265358979323846 / 180.0;  // rad
  double position_limit = 2.4;
  int max_steps = 200;
  double reset_range = 0.05;
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  std::array<double, 4> features() const { return {x, x_dot, theta, theta_dot}; }
};

using FaExperience = Experience<CartPoleState>;

class CartPoleEnv {
 public:
  explicit CartPoleEnv(CartPoleConfig cfg = {});

  int action_count() const { return 2; }  // 0 = push left, 1 = push right
  const CartPoleConfig& config() const { return cfg_; }

  // One Euler step of the dynamics alone: no termination logic.
  static CartPoleState integrate(const CartPoleState& s, int action,
                                 const CartPoleConfig& cfg);

  bool fallen(const CartPoleState& s) const;

  CartPoleState reset(Rng& rng);

  struct Step {
    CartPoleState next;
    double reward = 1.0;
    bool terminal = false;
  };
  Step step(int action);  // throws std::logic_error once the episode is done

  const CartPoleState& state() const { return state_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }

 private:
  CartPoleConfig cfg_;
  CartPoleState state_;
  int steps_ = 0;
  bool done_ = true;  // must reset() before stepping
};

}  // namespace rv
