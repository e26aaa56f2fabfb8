#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rv/experiment.hpp"

namespace rv {

namespace {

namespace fs = std::filesystem;

void note_excess(BoundReport& report, double excess) {
  report.max_excess = std::max(report.max_excess, excess);
}

// Sorted file list under dir whose names start with prefix and end in .csv.
std::vector<fs::path> matching_csvs(const std::string& dir,
                                    std::string_view prefix) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.starts_with(prefix) && name.ends_with(".csv")) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

// Seed component of names like episodes_seed17.csv; -1 when absent.
long long seed_of_filename(const std::string& name, std::string_view prefix) {
  if (!name.starts_with(prefix) || !name.ends_with(".csv")) return -1;
  const std::string_view digits(name.data() + prefix.size(),
                                name.size() - prefix.size() - 4);
  long long seed = 0;
  const auto [p, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), seed);
  if (ec != std::errc{} || p != digits.data() + digits.size()) return -1;
  return seed;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  return out;
}

}  // namespace

void accumulate_bound_report(BoundReport& report, const TraceRow& row,
                             double tolerance) {
  ++report.rows;
  const MetricRecord& r = row.record;
  const bool soft = is_soft(r.flavor);
  const double additivity_tol =
      is_fa(r.flavor) ? std::max(tolerance, 1e-7) : tolerance;

  const double upper_excess =
      std::max({std::abs(r.evb), std::abs(r.piv), std::abs(r.eiv)}) -
      r.upper_bound;
  if (upper_excess > tolerance) {
    ++(soft ? report.soft_upper : report.plain_upper);
    note_excess(report, upper_excess);
  }
  if (soft) {
    const double lower_excess =
        r.lower_bound - std::min(std::abs(r.evb), std::abs(r.eiv));
    if (lower_excess > tolerance) {
      ++report.soft_lower;
      note_excess(report, lower_excess);
    }
  }
  const double additivity_gap = std::abs(r.evb - (r.piv + r.eiv));
  if (additivity_gap > additivity_tol) {
    ++report.additivity;
    note_excess(report, additivity_gap);
  }
  if (r.piv < -tolerance) {
    ++report.negative_piv;
    note_excess(report, -r.piv);
  }
}

BoundReport verify_rows(std::span<const TraceRow> rows, double tolerance) {
  BoundReport report;
  for (const auto& row : rows) accumulate_bound_report(report, row, tolerance);
  return report;
}

BoundReport verify_trace_file(const std::string& path, double tolerance) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != trace_csv_header()) {
    throw std::runtime_error("bad trace header in " + path);
  }
  BoundReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    accumulate_bound_report(report, parse_trace_line(line), tolerance);
  }
  return report;
}

BoundReport verify_trace_dir(const std::string& dir, double tolerance) {
  const auto paths = matching_csvs(dir, "trace_");
  if (paths.empty()) {
    throw std::runtime_error("no trace_*.csv files under " + dir);
  }
  BoundReport report;
  for (const auto& path : paths) {
    const BoundReport one = verify_trace_file(path.string(), tolerance);
    report.rows += one.rows;
    report.plain_upper += one.plain_upper;
    report.soft_upper += one.soft_upper;
    report.soft_lower += one.soft_lower;
    report.additivity += one.additivity;
    report.negative_piv += one.negative_piv;
    report.max_excess = std::max(report.max_excess, one.max_excess);
  }
  return report;
}

SummaryResult emit_summary(const std::string& dir) {
  SummaryResult result;
  const fs::path base(dir);

  {  // Bound-vs-metric scatter data pooled over every trace file.
    const fs::path out_path = base / "scatter.csv";
    std::ofstream out = open_out(out_path);
    out << "flavor,abs_td,upper_bound,lower_bound,abs_evb,abs_piv,abs_eiv\n";
    for (const auto& path : matching_csvs(dir, "trace_")) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open: " + path.string());
      std::string line;
      if (!std::getline(in, line) || line != trace_csv_header()) {
        throw std::runtime_error("bad trace header in " + path.string());
      }
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const TraceRow row = parse_trace_line(line);
        const MetricRecord& r = row.record;
        out << flavor_name(r.flavor) << ',' << format_double(std::abs(r.td))
            << ',' << format_double(r.upper_bound) << ','
            << format_double(r.lower_bound) << ','
            << format_double(std::abs(r.evb)) << ','
            << format_double(std::abs(r.piv)) << ','
            << format_double(std::abs(r.eiv)) << '\n';
        ++result.scatter_rows;
      }
    }
    if (!out.flush()) {
      throw std::runtime_error("write failed: " + out_path.string());
    }
    result.files_written.push_back(out_path.string());
  }

  {  // Per-seed episode curves stacked into one file.
    const fs::path out_path = base / "learning_curves.csv";
    std::ofstream out = open_out(out_path);
    out << "seed,episode,total_reward,length,success,end_step\n";
    for (const auto& path : matching_csvs(dir, "episodes_seed")) {
      const long long seed =
          seed_of_filename(path.filename().string(), "episodes_seed");
      if (seed < 0) continue;
      for (const auto& ep : read_episodes_csv(path.string())) {
        out << seed << ',' << ep.episode << ','
            << format_double(ep.total_reward) << ',' << ep.length << ','
            << (ep.success ? 1 : 0) << ',' << ep.end_step << '\n';
      }
    }
    if (!out.flush()) {
      throw std::runtime_error("write failed: " + out_path.string());
    }
    result.files_written.push_back(out_path.string());
  }

  {  // Per-seed evaluation curves stacked into one file.
    const fs::path out_path = base / "eval_curves.csv";
    std::ofstream out = open_out(out_path);
    out << "seed,step,mean_return\n";
    for (const auto& path : matching_csvs(dir, "evals_seed")) {
      const long long seed =
          seed_of_filename(path.filename().string(), "evals_seed");
      if (seed < 0) continue;
      for (const auto& ev : read_evals_csv(path.string())) {
        out << seed << ',' << ev.step << ',' << format_double(ev.mean_return)
            << '\n';
      }
    }
    if (!out.flush()) {
      throw std::runtime_error("write failed: " + out_path.string());
    }
    result.files_written.push_back(out_path.string());
  }

  const fs::path linear_path = base / "linear_summary.csv";
  if (fs::exists(linear_path)) {  // Replay-count means per (n, strategy).
    const auto results = read_linear_csv(linear_path.string());
    struct Acc {
      long long runs = 0;
      long long converged = 0;
      long long optimal_runs = 0;
      double optimal_sum = 0.0;
      long long quiescence_runs = 0;
      double quiescence_sum = 0.0;
    };
    std::vector<std::pair<std::pair<int, LinearStrategy>, Acc>> groups;
    for (const auto& r : results) {
      const std::pair<int, LinearStrategy> key{r.n, r.strategy};
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const auto& g) { return g.first == key; });
      if (it == groups.end()) {
        groups.push_back({key, {}});
        it = std::prev(groups.end());
      }
      Acc& acc = it->second;
      ++acc.runs;
      if (r.converged) ++acc.converged;
      if (r.to_optimal >= 0) {
        ++acc.optimal_runs;
        acc.optimal_sum += static_cast<double>(r.to_optimal);
      }
      if (r.to_quiescence >= 0) {
        ++acc.quiescence_runs;
        acc.quiescence_sum += static_cast<double>(r.to_quiescence);
      }
    }
    const fs::path out_path = base / "linear_means.csv";
    std::ofstream out = open_out(out_path);
    out << "n,strategy,runs,converged,mean_to_optimal,mean_to_quiescence\n";
    for (const auto& [key, acc] : groups) {
      out << key.first << ',' << linear_strategy_name(key.second) << ','
          << acc.runs << ',' << acc.converged << ',';
      if (acc.optimal_runs > 0) {
        out << format_double(acc.optimal_sum / acc.optimal_runs);
      } else {
        out << -1;
      }
      out << ',';
      if (acc.quiescence_runs > 0) {
        out << format_double(acc.quiescence_sum / acc.quiescence_runs);
      } else {
        out << -1;
      }
      out << '\n';
    }
    if (!out.flush()) {
      throw std::runtime_error("write failed: " + out_path.string());
    }
    result.files_written.push_back(out_path.string());
  }

  return result;
}

}  // namespace rv
