#pragma once
// Shared numeric kernels: temperature-scaled log-sum-exp / softmax with
// max-shift stabilization, deterministic argmax, and seedable RNG streams.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rv {

// beta * log(sum_i exp(values[i] / beta)), computed with a max shift so that
// no intermediate overflows for |v| <= 1e6 and beta >= 1e-3.
// Throws std::invalid_argument on empty input or beta <= 0.
double logsumexp(double beta, std::span<const double> values);

// softmax(values / beta); entries positive, sum normalized to 1.
std::vector<double> softmax(double beta, std::span<const double> values);
void softmax_into(double beta, std::span<const double> values,
                  std::span<double> out);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_tiebreak(std::span<const double> values);

double max_value(std::span<const double> values);

// Shannon entropy -sum p*ln(p) of a probability vector (0*ln0 := 0).
double entropy(std::span<const double> probs);

// Deterministic RNG wrapper. Draws are mapped from raw 64-bit outputs by
// fixed arithmetic (no std::*_distribution) so a given seed yields the same
// stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Sample an index from a probability vector (entries >= 0, sum ~ 1).
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 eng_;
};

// Substream split: one root seed, one independent stream per purpose
// (env noise, action sampling, replay sampling, ...).
Rng rng_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace rv
