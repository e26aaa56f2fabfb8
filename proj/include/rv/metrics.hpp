#pragma once
// Per-update value metrics of an experience (expected value of backup and its
// policy-improvement / evaluation-improvement split) for greedy and softmax
// policies, with their TD-error bounds.

#include <span>
#include <string_view>
#include <utility>

#include "rv/tabular.hpp"

namespace rv {

enum class Flavor { plain, soft, fa_plain, fa_soft };

std::string_view flavor_name(Flavor f);
Flavor flavor_from_name(std::string_view name);  // throws on unknown name
inline bool is_soft(Flavor f) {
  return f == Flavor::soft || f == Flavor::fa_soft;
}
inline bool is_fa(Flavor f) {
  return f == Flavor::fa_plain || f == Flavor::fa_soft;
}

struct MetricRecord {
  double td = 0.0;
  double evb = 0.0;  // change of the state's (soft) value caused by the update
  double piv = 0.0;  // policy-improvement part
  double eiv = 0.0;  // policy-evaluation part
  double rho_max = 0.0;  // max of old/new policy probability of e's action
  double rho_min = 0.0;  // min of the same two probabilities
  double upper_bound = 0.0;  // alpha*|td| (plain) or rho_max*|td| (soft)
  double lower_bound = 0.0;  // 0 (plain) or rho_min*|td| (soft)
  Flavor flavor = Flavor::plain;
  bool violation = false;  // any invariant breach at creation tolerance
};

// Row-level kernels (a row is Q(state, .)).
double evb_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new);
double piv_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new);
double eiv_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new);
double evb_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new);
double piv_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new);
double eiv_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new);

// Table-level forms.
double evb_q(const QTable& q_old, const QTable& q_new, int state);
double piv_q(const QTable& q_old, const QTable& q_new, int state);
double eiv_q(const QTable& q_old, const QTable& q_new, int state);
double evb_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta);
double piv_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta);
double eiv_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta);

// Bound values.
double bound_q(double td, double alpha);
// (rho_min*|td|, rho_max*|td|) from the two policy probabilities of e's action.
std::pair<double, double> bounds_soft(double td, double pi_old_ak,
                                      double pi_new_ak);

// True when every MetricRecord invariant holds: metrics within upper bound,
// soft lower bounds, piv nonnegative, and evb = piv + eiv (additivity checked
// at 1e-7 for function-approximation flavors, bound_tol otherwise).
bool record_within_bounds(const MetricRecord& r, double bound_tol);

inline constexpr double kMetricTolerance = 1e-9;

// Bundle the metrics of one tabular update. q_new must be the result of the
// flavor's update rule applied to q_old on e. alpha is used by the plain
// bound, beta by the soft policies; gamma recomputes the TD.
MetricRecord metric_record_tabular(const QTable& q_old, const QTable& q_new,
                                   const TabExperience& e, Flavor flavor,
                                   double alpha, double beta, double gamma);

// Assemble a record from precomputed rows (shared by tabular fast path and
// the function-approximation virtual rows). td must match the update that
// produced row_new from row_old; effective_alpha scales the plain bound.
MetricRecord metric_record_rows(std::span<const double> row_old,
                                std::span<const double> row_new, int action,
                                double td, Flavor flavor,
                                double effective_alpha, double beta);

}  // namespace rv
