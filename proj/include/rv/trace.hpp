#pragma once
// Run traces: per-update metric rows, episode statistics, evaluation points,
// and their CSV round-trip (shortest round-trip decimals, byte-stable).

#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rv/env.hpp"
#include "rv/metrics.hpp"

namespace rv {

struct TraceRow {
  long long step = 0;
  long long episode = 0;
  std::string state;  // tabular: decimal id; network runs: ';'-joined features
  int action = 0;
  double reward = 0.0;
  MetricRecord record;
  // Raw priority base (|td| or rho_max*|td|) when the row came from a
  // priority-sampled batch; -1 otherwise. Not serialized.
  double priority_base = -1.0;
};

// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);  // throws std::runtime_error

std::string tab_state_string(int state);
std::string fa_state_string(const CartPoleState& s);

std::string trace_csv_header();
std::string trace_csv_line(const TraceRow& row);
TraceRow parse_trace_line(std::string_view line);  // throws std::runtime_error

// Streaming writer so full training runs never hold their rows in memory.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write(const TraceRow& row);
  void close();  // flushes; throws std::runtime_error on I/O failure
  ~TraceWriter();

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<TraceRow> read_trace_csv(const std::string& path);
void write_trace_csv(const std::string& path, std::span<const TraceRow> rows);

struct EpisodeStat {
  long long episode = 0;
  double total_reward = 0.0;
  long long length = 0;
  bool success = false;    // ended at a goal/terminal, not at the step cap
  long long end_step = 0;  // global environment step when the episode closed
};

struct EvalPoint {
  long long step = 0;
  double mean_return = 0.0;
};

void write_episodes_csv(const std::string& path,
                        std::span<const EpisodeStat> episodes);
std::vector<EpisodeStat> read_episodes_csv(const std::string& path);
void write_evals_csv(const std::string& path, std::span<const EvalPoint> evals);
std::vector<EvalPoint> read_evals_csv(const std::string& path);

}  // namespace rv
