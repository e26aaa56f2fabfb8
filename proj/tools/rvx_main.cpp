// Experiment driver: runs configured experiments to CSV, verifies the
// per-update value-metric bounds over saved traces, sweeps corridor replay
// counts, and aggregates run directories into plot-ready summaries.
//
// Exit codes: 0 success, 2 bound violations found, 3 configuration error,
// 4 training divergence.

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rv/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rv;

constexpr int kExitViolation = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDivergence = 4;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in seed list");
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw ConfigError("bad seed: '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

// One training run -> trace_seedK.csv / episodes_seedK.csv / evals_seedK.csv.
RunTrace run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                      const fs::path& out_dir) {
  const std::string tag = "seed" + std::to_string(seed);
  TraceWriter writer((out_dir / ("trace_" + tag + ".csv")).string());
  RunTrace trace;
  const RowSink sink = [&](const TraceRow& row) { writer.write(row); };
  if (const auto* maze = std::get_if<MazeExperimentConfig>(&cfg.spec)) {
    trace = run_maze(*maze, seed, sink);
  } else if (const auto* cart =
                 std::get_if<CartPoleExperimentConfig>(&cfg.spec)) {
    trace = run_cartpole(*cart, seed, sink);
  } else {
    throw std::logic_error("run_one_seed: unsupported experiment kind");
  }
  writer.close();
  write_episodes_csv((out_dir / ("episodes_" + tag + ".csv")).string(),
                     trace.episodes);
  if (!trace.evals.empty()) {
    write_evals_csv((out_dir / ("evals_" + tag + ".csv")).string(),
                    trace.evals);
  }
  return trace;
}

int command_run(const std::string& config_path, const std::string& out_dir,
                const std::string& seeds_override, int jobs) {
  ExperimentConfig cfg = load_config(config_path);

  if (std::holds_alternative<AtariStubConfig>(cfg.spec)) {
    throw ConfigError(
        "the atari preset documents a full-scale setup only; this build "
        "does not run it");
  }

  fs::create_directories(out_dir);

  if (const auto* linear = std::get_if<LinearExperimentConfig>(&cfg.spec)) {
    const auto results = run_linear_comparison(*linear);
    const std::string path =
        (fs::path(out_dir) / "linear_summary.csv").string();
    write_linear_csv(path, results);
    long long converged = 0;
    for (const auto& r : results) converged += r.converged ? 1 : 0;
    std::printf("linear: %zu runs (%lld converged) -> %s\n", results.size(),
                converged, path.c_str());
    return 0;
  }

  std::vector<std::uint64_t> seeds;
  if (!seeds_override.empty()) {
    seeds = parse_seed_list(seeds_override);
    if (auto* maze = std::get_if<MazeExperimentConfig>(&cfg.spec)) {
      maze->seeds = seeds;
    } else if (auto* cart = std::get_if<CartPoleExperimentConfig>(&cfg.spec)) {
      cart->seeds = seeds;
    }
  } else if (const auto* maze = std::get_if<MazeExperimentConfig>(&cfg.spec)) {
    seeds = maze->seeds;
  } else if (const auto* cart =
                 std::get_if<CartPoleExperimentConfig>(&cfg.spec)) {
    seeds = cart->seeds;
  }

  // Re-validate after any seed override.
  std::visit([](const auto& spec) {
    if constexpr (requires { spec.validate(); }) spec.validate();
  }, cfg.spec);

  if (jobs < 1) jobs = 1;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::exception_ptr first_error;
  long long total_rows = 0;
  long long total_violations = 0;

  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (first_error) return;
      }
      try {
        const RunTrace trace = run_one_seed(cfg, seeds[i], out_dir);
        std::lock_guard<std::mutex> lock(io_mutex);
        total_rows += trace.rows;
        total_violations += trace.violations;
        std::printf(
            "seed %llu: %lld metric rows, %lld episodes, %lld violations\n",
            static_cast<unsigned long long>(trace.seed), trace.rows,
            static_cast<long long>(trace.episodes.size()), trace.violations);
        std::fflush(stdout);
      } catch (...) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::printf("total: %lld metric rows, %lld violations -> %s\n", total_rows,
              total_violations, out_dir.c_str());
  return total_violations == 0 ? 0 : kExitViolation;
}

int command_verify(const std::string& in, double tolerance) {
  BoundReport report;
  if (fs::is_directory(in)) {
    report = verify_trace_dir(in, tolerance);
  } else {
    report = verify_trace_file(in, tolerance);
  }
  std::printf("rows checked:          %lld\n", report.rows);
  std::printf("step-size upper bound: %lld over\n", report.plain_upper);
  std::printf("policy upper bound:    %lld over\n", report.soft_upper);
  std::printf("policy lower bound:    %lld under\n", report.soft_lower);
  std::printf("additivity:            %lld off\n", report.additivity);
  std::printf("negative improvement:  %lld\n", report.negative_piv);
  std::printf("worst excess:          %.3e\n", report.max_excess);
  if (report.total_violations() == 0) {
    std::printf("all bounds hold at tolerance %.1e\n", tolerance);
    return 0;
  }
  std::printf("bound violations found\n");
  return kExitViolation;
}

int command_linear(const std::string& n_list, const std::string& strategies,
                   int seeds_per_point, const std::string& out) {
  LinearExperimentConfig cfg;
  if (!n_list.empty()) {
    cfg.n_values.clear();
    std::stringstream ss(n_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      cfg.n_values.push_back(std::stoi(item));
    }
  }
  if (!strategies.empty()) {
    cfg.strategies.clear();
    std::stringstream ss(strategies);
    std::string item;
    while (std::getline(ss, item, ',')) {
      cfg.strategies.push_back(linear_strategy_from_name(item));
    }
  }
  if (seeds_per_point > 0) cfg.seeds_per_point = seeds_per_point;
  cfg.validate();

  const auto results = run_linear_comparison(cfg);
  for (int n : cfg.n_values) {
    for (const LinearStrategy strategy : cfg.strategies) {
      long long runs = 0, converged = 0, optimal_runs = 0;
      double optimal_sum = 0.0;
      long long quiescence = -1;
      for (const auto& r : results) {
        if (r.n != n || r.strategy != strategy) continue;
        ++runs;
        if (r.converged) ++converged;
        if (r.to_optimal >= 0) {
          ++optimal_runs;
          optimal_sum += static_cast<double>(r.to_optimal);
        }
        if (r.to_quiescence >= 0) quiescence = r.to_quiescence;
      }
      std::printf("n=%-3d %-11s runs=%-4lld converged=%-4lld", n,
                  std::string(linear_strategy_name(strategy)).c_str(), runs,
                  converged);
      if (optimal_runs > 0) {
        std::printf(" mean_to_optimal=%.2f", optimal_sum / optimal_runs);
      }
      if (quiescence >= 0) {
        std::printf(" to_quiescence=%lld", quiescence);
      }
      std::printf("\n");
    }
  }
  if (!out.empty()) {
    fs::create_directories(fs::path(out).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(out).parent_path());
    write_linear_csv(out, results);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

int command_summarize(const std::string& in) {
  const SummaryResult result = emit_summary(in);
  for (const auto& f : result.files_written) {
    std::printf("wrote %s\n", f.c_str());
  }
  std::printf("scatter rows: %lld\n", result.scatter_rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Replay-value experiments: corridor replay-count sweeps, maze and "
      "cart-pole training with per-update value metrics, and bound "
      "verification over saved traces"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", seeds_override;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  auto* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", config_path, "JSON experiment config")
      ->required();
  run->add_option("--out", out_dir, "Output directory (created if missing)");
  run->add_option("--seeds", seeds_override,
                  "Comma-separated seed override, e.g. 1,2,3");
  run->add_option("--jobs", jobs, "Parallel seed workers");

  std::string verify_in;
  double tolerance = 1e-9;
  auto* verify =
      app.add_subcommand("verify-bounds", "Check metric bounds over traces");
  verify->add_option("--in", verify_in, "Trace CSV file or run directory")
      ->required();
  verify->add_option("--tolerance", tolerance, "Comparison tolerance");

  std::string n_list, strategies, linear_out;
  int seeds_per_point = 0;
  auto* linear = app.add_subcommand(
      "linear-compare", "Corridor replay counts per sampling strategy");
  linear->add_option("--n", n_list, "Comma-separated corridor lengths");
  linear->add_option("--strategies", strategies,
                     "Comma-separated subset of uniform,oracle_td,oracle_evb");
  linear->add_option("--seeds-per-point", seeds_per_point,
                     "Uniform-strategy sample size");
  linear->add_option("--out", linear_out, "Write per-run CSV here");

  std::string summarize_in;
  auto* summarize =
      app.add_subcommand("summarize", "Aggregate a run directory for plots");
  summarize->add_option("--in", summarize_in, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return command_run(config_path, out_dir, seeds_override, jobs);
    }
    if (verify->parsed()) return command_verify(verify_in, tolerance);
    if (linear->parsed()) {
      return command_linear(n_list, strategies, seeds_per_point, linear_out);
    }
    if (summarize->parsed()) return command_summarize(summarize_in);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
