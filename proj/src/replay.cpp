#include "rv/replay.hpp"

#include <bit>
#include <cmath>

namespace rv {

SumTree::SumTree(std::size_t leaf_count) : leaf_count_(leaf_count) {
  if (leaf_count == 0) throw std::invalid_argument("sum tree needs at least one leaf");
  base_ = std::bit_ceil(leaf_count);
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::update(std::size_t leaf, double priority) {
  if (leaf >= leaf_count_) throw std::out_of_range("sum tree leaf out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw std::invalid_argument("sum tree priority must be finite and nonnegative");
  }
  std::size_t i = base_ + leaf;
  nodes_[i] = priority;
  for (i /= 2; i >= 1; i /= 2) {
    nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
  }
}

double SumTree::value_of(std::size_t leaf) const {
  if (leaf >= leaf_count_) throw std::out_of_range("sum tree leaf out of range");
  return nodes_[base_ + leaf];
}

double SumTree::total() const { return nodes_[1]; }

std::size_t SumTree::sample(double prefix) const {
  const double t = total();
  if (t <= 0.0) throw std::invalid_argument("sum tree is empty");
  if (!(prefix >= 0.0) || !(prefix < t)) {
    throw std::invalid_argument("sum tree prefix outside [0, total)");
  }
  std::size_t i = 1;
  while (i < base_) {
    const std::size_t left = 2 * i;
    if (prefix < nodes_[left]) {
      i = left;
    } else {
      prefix -= nodes_[left];
      i = left + 1;
    }
  }
  std::size_t leaf = i - base_;
  // Rounding in the subtractions can spill past the last populated leaf.
  if (leaf >= leaf_count_) leaf = leaf_count_ - 1;
  return leaf;
}

bool SumTree::consistent(double rel_tol) const {
  for (std::size_t i = 1; i < base_; ++i) {
    const double sum = nodes_[2 * i] + nodes_[2 * i + 1];
    if (std::abs(nodes_[i] - sum) > rel_tol * std::max(1.0, std::abs(sum))) {
      return false;
    }
  }
  return true;
}

std::vector<std::size_t> sample_uniform(std::size_t size, std::size_t batch,
                                        Rng& rng) {
  if (size == 0) throw std::invalid_argument("cannot sample from an empty buffer");
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = rng.below(size);
  return out;
}

namespace {

double oracle_score(const TabExperience& e, OracleCriterion criterion,
                    const QTable& q, double alpha, double gamma,
                    std::vector<double>& scratch) {
  const double td = td_error(q, e, gamma);
  if (criterion == OracleCriterion::abs_td) return std::abs(td);
  const auto row = q.row(e.state);
  scratch.assign(row.begin(), row.end());
  scratch[static_cast<std::size_t>(e.action)] += alpha * td;
  return std::abs(max_value(scratch) - max_value(row));
}

}  // namespace

OraclePick sample_greedy_oracle_scored(const ReplayBuffer<TabExperience>& buf,
                                       OracleCriterion criterion,
                                       const QTable& q, double alpha,
                                       double gamma) {
  if (buf.size() == 0) throw std::invalid_argument("cannot sample from an empty buffer");
  OraclePick best;
  std::vector<double> scratch;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double score = oracle_score(buf[i], criterion, q, alpha, gamma, scratch);
    if (i == 0 || score > best.score) best = {i, score};
  }
  return best;
}

std::size_t sample_greedy_oracle(const ReplayBuffer<TabExperience>& buf,
                                 OracleCriterion criterion, const QTable& q,
                                 double alpha, double gamma) {
  return sample_greedy_oracle_scored(buf, criterion, q, alpha, gamma).slot;
}

double LinearSchedule::at(long long t) const {
  if (t <= 0) return start;
  if (t >= horizon) return end;
  return start + (end - start) * (static_cast<double>(t) / static_cast<double>(horizon));
}

void LinearSchedule::validate() const {
  if (horizon < 1) throw std::invalid_argument("schedule horizon must be >= 1");
  if (!std::isfinite(start) || !std::isfinite(end)) {
    throw std::invalid_argument("schedule endpoints must be finite");
  }
}

void PrioritySamplerConfig::validate() const {
  if (!(alpha_exp >= 0.0 && alpha_exp <= 1.0)) {
    throw std::invalid_argument("alpha_exp must be in [0,1]");
  }
  if (!(beta_is >= 0.0 && beta_is <= 1.0)) {
    throw std::invalid_argument("beta_is must be in [0,1]");
  }
  if (!(epsilon_prio > 0.0)) {
    throw std::invalid_argument("epsilon_prio must be positive");
  }
  beta_is_schedule.validate();
  if (!(beta_is_schedule.start >= 0.0 && beta_is_schedule.start <= 1.0 &&
        beta_is_schedule.end >= 0.0 && beta_is_schedule.end <= 1.0)) {
    throw std::invalid_argument("beta_is schedule must stay in [0,1]");
  }
}

double shaped_priority(double base, const PrioritySamplerConfig& cfg) {
  if (!(base >= 0.0)) throw std::invalid_argument("priority base must be >= 0");
  return std::pow(base + cfg.epsilon_prio, cfg.alpha_exp);
}

double per_priority(double td, const PrioritySamplerConfig& cfg) {
  return shaped_priority(std::abs(td), cfg);
}

double ver_priority(double td_soft, double pi_old_ak, double pi_new_ak,
                    const PrioritySamplerConfig& cfg) {
  return shaped_priority(std::max(pi_old_ak, pi_new_ak) * std::abs(td_soft), cfg);
}

std::vector<double> is_weights(std::span<const double> probabilities,
                               std::size_t buffer_size, double beta_is) {
  if (probabilities.empty()) throw std::invalid_argument("is_weights needs a nonempty batch");
  if (buffer_size == 0) throw std::invalid_argument("buffer_size must be positive");
  std::vector<double> w(probabilities.size());
  double w_max = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(probabilities[i] > 0.0)) {
      throw std::invalid_argument("sampling probabilities must be positive");
    }
    w[i] = std::pow(static_cast<double>(buffer_size) * probabilities[i], -beta_is);
    w_max = std::max(w_max, w[i]);
  }
  for (auto& x : w) x /= w_max;
  return w;
}

ProportionalSampler::ProportionalSampler(std::size_t capacity,
                                         const PrioritySamplerConfig& cfg)
    : tree_(capacity), cfg_(cfg), max_priority_seen_(shaped_priority(1.0, cfg)) {
  cfg_.validate();
}

void ProportionalSampler::on_push(std::size_t slot) {
  tree_.update(slot, max_priority_seen_);
}

void ProportionalSampler::set_base_priority(std::size_t slot, double base) {
  const double p = shaped_priority(base, cfg_);
  tree_.update(slot, p);
  if (p > max_priority_seen_) max_priority_seen_ = p;
}

double ProportionalSampler::probability_of_slot(std::size_t slot) const {
  return tree_.value_of(slot) / tree_.total();
}

std::vector<ProportionalSampler::Draw> ProportionalSampler::sample(
    std::size_t batch, Rng& rng) {
  const double t = tree_.total();
  if (t <= 0.0) throw std::invalid_argument("cannot sample before any push");
  std::vector<Draw> out(batch);
  for (auto& d : out) {
    d.slot = tree_.sample(rng.uniform01() * t);
    d.probability = tree_.value_of(d.slot) / t;
  }
  return out;
}

}  // namespace rv
