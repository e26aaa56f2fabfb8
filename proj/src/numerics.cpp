#include "rv/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace rv {

namespace {

void require_nonempty(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty value set");
}

void require_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("temperature must be > 0");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double max_value(std::span<const double> values) {
  require_nonempty(values);
  double m = values[0];
  for (double v : values)
    if (v > m) m = v;
  return m;
}

double logsumexp(double beta, std::span<const double> values) {
  require_beta(beta);
  const double m = max_value(values);
  double acc = 0.0;
  for (double v : values) acc += std::exp((v - m) / beta);
  return m + beta * std::log(acc);
}

void softmax_into(double beta, std::span<const double> values,
                  std::span<double> out) {
  require_beta(beta);
  const double m = max_value(values);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp((values[i] - m) / beta);
    acc += out[i];
  }
  for (std::size_t i = 0; i < values.size(); ++i) out[i] /= acc;
}

std::vector<double> softmax(double beta, std::span<const double> values) {
  std::vector<double> out(values.size());
  softmax_into(beta, values, out);
  return out;
}

std::size_t argmax_tiebreak(std::span<const double> values) {
  require_nonempty(values);
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Lemire multiply-shift; bias is O(n / 2^64), negligible for our ranges.
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::size_t Rng::categorical(std::span<const double> probs) {
  require_nonempty(probs);
  const double u = uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;  // guard against fp shortfall in the cumulative sum
}

Rng rng_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^
                        splitmix64(0x517cc1b727220a95ULL * (stream + 1))));
}

}  // namespace rv
