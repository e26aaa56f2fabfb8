#pragma once
// Experiment configuration (JSON-backed), the three experiment runners, the
// trace bound checker, and the summary emitter.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rv/env.hpp"
#include "rv/mlp.hpp"
#include "rv/replay.hpp"
#include "rv/tabular.hpp"
#include "rv/trace.hpp"

namespace rv {

// Maps to process exit code 3 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ReplayStrategy { uniform, per, ver };
std::string_view replay_strategy_name(ReplayStrategy s);
ReplayStrategy replay_strategy_from_name(std::string_view name);  // ConfigError

enum class LinearStrategy { uniform, oracle_td, oracle_evb };
std::string_view linear_strategy_name(LinearStrategy s);
LinearStrategy linear_strategy_from_name(std::string_view name);  // ConfigError

struct LinearExperimentConfig {
  std::vector<int> n_values{3, 5, 10, 20};
  std::vector<LinearStrategy> strategies{
      LinearStrategy::uniform, LinearStrategy::oracle_td,
      LinearStrategy::oracle_evb};
  int seeds_per_point = 300;  // uniform strategy only; oracles run once
  double gamma = 0.99;
  double goal_reward = 1.0;
  long long cap_factor = 100;  // give up after cap_factor * n^2 replays

  void validate() const;  // throws ConfigError
};

struct MazeExperimentConfig {
  bool soft = false;
  MazeConfig maze = MazeConfig::default_layout();  // carries gamma
  double alpha = 1.0;                 // q flavor step size
  double beta = 0.002;                // soft flavor temperature (see README)
  EpsilonSchedule epsilon{1.0, 0.001, 10000};  // q flavor behavior policy
  long long total_steps = 10000;
  long long episode_cap = 200;
  int replay_ratio = 1;  // uniform replays per environment step
  std::vector<std::uint64_t> seeds;

  void validate() const;  // throws ConfigError
};

struct CartPoleExperimentConfig {
  bool soft = false;
  ReplayStrategy replay = ReplayStrategy::uniform;
  FaUpdateConfig net;  // learning rate, gamma, batch, buffer, steps, beta
  EpsilonSchedule epsilon{1.0, 0.01, 10000};  // dqn behavior policy
  long long eval_period = 1000;
  int eval_episodes = 10;
  PrioritySamplerConfig sampler;  // beta_is_schedule horizon = total_steps
  CartPoleConfig env;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  void validate() const;  // throws ConfigError (ver requires soft)
};

// Documented full-scale preset; never runnable at this scale.
struct AtariStubConfig {
  std::string note;
  double alpha_is = 0.4;
  double beta_is = 0.6;
  double beta = 0.05;
};

struct ExperimentConfig {
  std::variant<LinearExperimentConfig, MazeExperimentConfig,
               CartPoleExperimentConfig, AtariStubConfig>
      spec;
};

// Parse + schema-validate (unknown keys rejected). Throws ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// ---- Runners ----------------------------------------------------------

using RowSink = std::function<void(const TraceRow&)>;

struct RunTrace {
  std::uint64_t seed = 0;
  Flavor flavor = Flavor::plain;
  std::vector<EpisodeStat> episodes;
  std::vector<EvalPoint> evals;
  long long rows = 0;
  long long violations = 0;     // records that failed their creation check
  long long replay_count = 0;   // replayed updates (excludes online ones)
};

struct LinearRunResult {
  int n = 0;
  LinearStrategy strategy = LinearStrategy::uniform;
  std::uint64_t seed = 0;
  long long to_optimal = -1;     // replays until east is strictly greedy
  long long to_quiescence = -1;  // replays until the criterion is all-zero
  bool converged = false;
};

std::vector<LinearRunResult> run_linear_comparison(
    const LinearExperimentConfig& cfg);
void write_linear_csv(const std::string& path,
                      std::span<const LinearRunResult> results);
std::vector<LinearRunResult> read_linear_csv(const std::string& path);

RunTrace run_maze(const MazeExperimentConfig& cfg, std::uint64_t seed,
                  const RowSink& sink);
RunTrace run_cartpole(const CartPoleExperimentConfig& cfg, std::uint64_t seed,
                      const RowSink& sink);

// ---- Bound verification ------------------------------------------------

struct BoundReport {
  long long rows = 0;
  long long plain_upper = 0;      // plain rows above the step-size bound
  long long soft_upper = 0;       // soft rows above the policy-weighted bound
  long long soft_lower = 0;       // soft evb/eiv below the lower bound
  long long additivity = 0;       // evb != piv + eiv within tolerance
  long long negative_piv = 0;
  double max_excess = 0.0;        // worst violation magnitude seen

  long long total_violations() const {
    return plain_upper + soft_upper + soft_lower + additivity + negative_piv;
  }
};

void accumulate_bound_report(BoundReport& report, const TraceRow& row,
                             double tolerance);
BoundReport verify_rows(std::span<const TraceRow> rows, double tolerance);
BoundReport verify_trace_file(const std::string& path, double tolerance);
// All trace_*.csv files under dir (sorted); throws std::runtime_error if none.
BoundReport verify_trace_dir(const std::string& dir, double tolerance);

// ---- Summary ------------------------------------------------------------

struct SummaryResult {
  std::vector<std::string> files_written;
  long long scatter_rows = 0;
};

// Reads trace_/episodes_/evals_/linear CSVs in dir and writes scatter data,
// aggregated curves, and replay-count means next to them.
SummaryResult emit_summary(const std::string& dir);

}  // namespace rv
