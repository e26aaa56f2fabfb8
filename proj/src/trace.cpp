#include "rv/trace.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <system_error>

namespace rv {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed float field: '" + std::string(s) + "'");
  }
  return v;
}

namespace {

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed integer field: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> read_lines(const std::string& path,
                                    const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  if (line != expected_header) {
    throw std::runtime_error("unexpected header in " + path + ": " + line);
  }
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string tab_state_string(int state) { return std::to_string(state); }

std::string fa_state_string(const CartPoleState& s) {
  const auto f = s.features();
  std::string out = format_double(f[0]);
  for (std::size_t i = 1; i < f.size(); ++i) {
    out += ';';
    out += format_double(f[i]);
  }
  return out;
}

std::string trace_csv_header() {
  return "step,episode,state,action,reward,td,evb,piv,eiv,rho_max,rho_min,"
         "upper_bound,lower_bound,flavor";
}

std::string trace_csv_line(const TraceRow& row) {
  std::string out;
  out.reserve(160);
  out += std::to_string(row.step);
  out += ',';
  out += std::to_string(row.episode);
  out += ',';
  out += row.state;
  out += ',';
  out += std::to_string(row.action);
  for (double v : {row.reward, row.record.td, row.record.evb, row.record.piv,
                   row.record.eiv, row.record.rho_max, row.record.rho_min,
                   row.record.upper_bound, row.record.lower_bound}) {
    out += ',';
    out += format_double(v);
  }
  out += ',';
  out += flavor_name(row.record.flavor);
  return out;
}

TraceRow parse_trace_line(std::string_view line) {
  const auto f = split_fields(line);
  if (f.size() != 14) {
    throw std::runtime_error("expected 14 fields, got " +
                             std::to_string(f.size()) + ": '" +
                             std::string(line) + "'");
  }
  TraceRow row;
  row.step = parse_int(f[0]);
  row.episode = parse_int(f[1]);
  row.state = std::string(f[2]);
  row.action = static_cast<int>(parse_int(f[3]));
  row.reward = parse_double(f[4]);
  row.record.td = parse_double(f[5]);
  row.record.evb = parse_double(f[6]);
  row.record.piv = parse_double(f[7]);
  row.record.eiv = parse_double(f[8]);
  row.record.rho_max = parse_double(f[9]);
  row.record.rho_min = parse_double(f[10]);
  row.record.upper_bound = parse_double(f[11]);
  row.record.lower_bound = parse_double(f[12]);
  try {
    row.record.flavor = flavor_from_name(f[13]);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(e.what()) + ": '" +
                             std::string(f[13]) + "'");
  }
  return row;
}

TraceWriter::TraceWriter(const std::string& path) : path_(path), out_(path) {
  if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  out_ << trace_csv_header() << '\n';
}

void TraceWriter::write(const TraceRow& row) {
  out_ << trace_csv_line(row) << '\n';
}

void TraceWriter::close() {
  if (!out_.is_open()) return;
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_);
  out_.close();
}

TraceWriter::~TraceWriter() {
  if (out_.is_open()) out_.close();
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::vector<TraceRow> rows;
  for (const auto& line : read_lines(path, trace_csv_header())) {
    rows.push_back(parse_trace_line(line));
  }
  return rows;
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> rows) {
  TraceWriter w(path);
  for (const auto& r : rows) w.write(r);
  w.close();
}

namespace {
constexpr const char* kEpisodeHeader =
    "episode,total_reward,length,success,end_step";
constexpr const char* kEvalHeader = "step,mean_return";
}  // namespace

void write_episodes_csv(const std::string& path,
                        std::span<const EpisodeStat> episodes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kEpisodeHeader << '\n';
  for (const auto& e : episodes) {
    out << e.episode << ',' << format_double(e.total_reward) << ',' << e.length
        << ',' << (e.success ? 1 : 0) << ',' << e.end_step << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<EpisodeStat> read_episodes_csv(const std::string& path) {
  std::vector<EpisodeStat> out;
  for (const auto& line : read_lines(path, kEpisodeHeader)) {
    const auto f = split_fields(line);
    if (f.size() != 5) throw std::runtime_error("malformed episode row: " + line);
    EpisodeStat e;
    e.episode = parse_int(f[0]);
    e.total_reward = parse_double(f[1]);
    e.length = parse_int(f[2]);
    e.success = parse_int(f[3]) != 0;
    e.end_step = parse_int(f[4]);
    out.push_back(e);
  }
  return out;
}

void write_evals_csv(const std::string& path,
                     std::span<const EvalPoint> evals) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kEvalHeader << '\n';
  for (const auto& e : evals) {
    out << e.step << ',' << format_double(e.mean_return) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<EvalPoint> read_evals_csv(const std::string& path) {
  std::vector<EvalPoint> out;
  for (const auto& line : read_lines(path, kEvalHeader)) {
    const auto f = split_fields(line);
    if (f.size() != 2) throw std::runtime_error("malformed eval row: " + line);
    out.push_back({parse_int(f[0]), parse_double(f[1])});
  }
  return out;
}

}  // namespace rv
