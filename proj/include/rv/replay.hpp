#pragma once
// Experience replay: ring buffer, sum-tree, and the four sampling strategies
// (uniform, greedy oracle by |TD| or |EVB|, proportional by |TD|, proportional
// by the policy-weighted soft-TD upper bound), plus importance-sampling
// weights.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rv/numerics.hpp"
#include "rv/tabular.hpp"

namespace rv {

// Fixed-capacity ring with FIFO eviction. Entries are addressed by slot
// (stable storage position), which pairs one-to-one with a sum-tree leaf.
template <class E>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    entries_.reserve(capacity);
  }

  // Stores e, evicting the oldest entry when full. Returns the slot written.
  std::size_t push(const E& e) {
    std::size_t slot = write_cursor_;
    if (entries_.size() < capacity_) {
      entries_.push_back(e);
    } else {
      entries_[slot] = e;
    }
    write_cursor_ = (write_cursor_ + 1) % capacity_;
    return slot;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return entries_.size() == capacity_; }
  const E& operator[](std::size_t slot) const { return entries_[slot]; }

 private:
  std::size_t capacity_;
  std::vector<E> entries_;
  std::size_t write_cursor_ = 0;
};

// Binary indexed tree over nonnegative priorities with prefix-sum descent.
// Leaf i covers the cumulative interval [sum(p_0..p_{i-1}), sum(p_0..p_i)).
class SumTree {
 public:
  explicit SumTree(std::size_t leaf_count);

  // Sets a leaf and resums its ancestors. Throws on negative or non-finite
  // priority or leaf out of range.
  void update(std::size_t leaf, double priority);

  double value_of(std::size_t leaf) const;
  double total() const;
  std::size_t leaf_count() const { return leaf_count_; }

  // Returns the leaf whose cumulative interval contains prefix.
  // Throws when total() == 0 or prefix is outside [0, total()).
  std::size_t sample(double prefix) const;

  // True when every internal node matches the sum of its children within
  // rel_tol relative tolerance.
  bool consistent(double rel_tol = 1e-9) const;

 private:
  std::size_t leaf_count_;
  std::size_t base_;  // leaves live at nodes_[base_ .. base_+leaf_count_)
  std::vector<double> nodes_;
};

// Batch of i.i.d. uniform slot indices (with replacement).
std::vector<std::size_t> sample_uniform(std::size_t size, std::size_t batch,
                                        Rng& rng);

enum class OracleCriterion { abs_td, abs_evb };

// Recomputes the criterion for every buffered experience against q and
// returns the argmax slot (lowest index on ties). abs_evb scores the change
// of max_a Q(s_k, a) that a q_update with the given alpha would cause.
std::size_t sample_greedy_oracle(const ReplayBuffer<TabExperience>& buf,
                                 OracleCriterion criterion, const QTable& q,
                                 double alpha, double gamma);

// Same, but also reports the winning criterion value (for quiescence tests).
struct OraclePick {
  std::size_t slot = 0;
  double score = 0.0;
};
OraclePick sample_greedy_oracle_scored(const ReplayBuffer<TabExperience>& buf,
                                       OracleCriterion criterion,
                                       const QTable& q, double alpha,
                                       double gamma);

// Clamped linear interpolation from start at t=0 to end at t=horizon.
struct LinearSchedule {
  double start = 0.4;
  double end = 1.0;
  long long horizon = 1;

  double at(long long t) const;
  void validate() const;  // throws std::invalid_argument
};

struct PrioritySamplerConfig {
  double alpha_exp = 0.6;     // priority exponent, [0,1]
  double beta_is = 0.4;       // static IS exponent, [0,1]
  double epsilon_prio = 1e-6; // additive floor, > 0
  LinearSchedule beta_is_schedule{0.4, 1.0, 1};

  double beta_is_at(long long t) const { return beta_is_schedule.at(t); }
  void validate() const;  // throws std::invalid_argument
};

// (base + epsilon_prio)^alpha_exp; base must be >= 0.
double shaped_priority(double base, const PrioritySamplerConfig& cfg);

// Proportional-replay priority from |td|.
double per_priority(double td, const PrioritySamplerConfig& cfg);

// Proportional-replay priority from the soft upper bound
// max(pi_old_ak, pi_new_ak) * |td_soft|.
double ver_priority(double td_soft, double pi_old_ak, double pi_new_ak,
                    const PrioritySamplerConfig& cfg);

// w_i = (buffer_size * P(i))^(-beta_is), normalized so the batch max is 1.
// Throws std::invalid_argument on empty input, nonpositive probability, or
// buffer_size == 0.
std::vector<double> is_weights(std::span<const double> probabilities,
                               std::size_t buffer_size, double beta_is);

// Sum-tree backed proportional sampler keyed by buffer slot. New experiences
// enter at the maximum shaped priority seen so far, so each is sampled at
// least once with high probability before its first priority refresh.
class ProportionalSampler {
 public:
  ProportionalSampler(std::size_t capacity, const PrioritySamplerConfig& cfg);

  // Call when the paired buffer stores into slot (new push or eviction
  // overwrite): the slot takes the max priority seen.
  void on_push(std::size_t slot);

  // Priority refresh from a raw base (|td| or rho_max*|td_soft|).
  void set_base_priority(std::size_t slot, double base);

  struct Draw {
    std::size_t slot = 0;
    double probability = 0.0;  // P(slot) at draw time
  };

  // Batch of slots ~ priority / total. Throws when nothing has been pushed.
  std::vector<Draw> sample(std::size_t batch, Rng& rng);

  double total() const { return tree_.total(); }
  double priority_of_slot(std::size_t slot) const { return tree_.value_of(slot); }
  double probability_of_slot(std::size_t slot) const;
  const SumTree& tree() const { return tree_; }
  const PrioritySamplerConfig& config() const { return cfg_; }

 private:
  SumTree tree_;
  PrioritySamplerConfig cfg_;
  double max_priority_seen_;
};

}  // namespace rv
