#include "rv/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rv {

std::string_view flavor_name(Flavor f) {
  switch (f) {
    case Flavor::plain: return "plain";
    case Flavor::soft: return "soft";
    case Flavor::fa_plain: return "fa_plain";
    case Flavor::fa_soft: return "fa_soft";
  }
  throw std::logic_error("unreachable");
}

Flavor flavor_from_name(std::string_view name) {
  if (name == "plain") return Flavor::plain;
  if (name == "soft") return Flavor::soft;
  if (name == "fa_plain") return Flavor::fa_plain;
  if (name == "fa_soft") return Flavor::fa_soft;
  throw std::invalid_argument("unknown metric flavor");
}

double evb_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new) {
  return max_value(row_new) - max_value(row_old);
}

double piv_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new) {
  const std::size_t a_old = argmax_tiebreak(row_old);
  return max_value(row_new) - row_new[a_old];
}

double eiv_greedy_rows(std::span<const double> row_old,
                       std::span<const double> row_new) {
  const std::size_t a_old = argmax_tiebreak(row_old);
  return row_new[a_old] - row_old[a_old];
}

double evb_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new) {
  return logsumexp(beta, row_new) - logsumexp(beta, row_old);
}

double piv_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new) {
  const auto p_old = softmax(beta, row_old);
  const auto p_new = softmax(beta, row_new);
  double acc = 0.0;
  for (std::size_t a = 0; a < row_new.size(); ++a)
    acc += (p_new[a] - p_old[a]) * row_new[a];
  return acc + beta * (entropy(p_new) - entropy(p_old));
}

double eiv_soft_rows(double beta, std::span<const double> row_old,
                     std::span<const double> row_new) {
  const auto p_old = softmax(beta, row_old);
  // Per-entry difference first: untouched entries contribute an exact zero,
  // so a single-entry change yields exactly pi_old(a_k) * delta.
  double acc = 0.0;
  for (std::size_t a = 0; a < row_old.size(); ++a)
    acc += p_old[a] * (row_new[a] - row_old[a]);
  return acc;
}

double evb_q(const QTable& q_old, const QTable& q_new, int state) {
  return evb_greedy_rows(q_old.row(state), q_new.row(state));
}
double piv_q(const QTable& q_old, const QTable& q_new, int state) {
  return piv_greedy_rows(q_old.row(state), q_new.row(state));
}
double eiv_q(const QTable& q_old, const QTable& q_new, int state) {
  return eiv_greedy_rows(q_old.row(state), q_new.row(state));
}
double evb_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta) {
  return evb_soft_rows(beta, q_old.row(state), q_new.row(state));
}
double piv_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta) {
  return piv_soft_rows(beta, q_old.row(state), q_new.row(state));
}
double eiv_soft(const QTable& q_old, const QTable& q_new, int state,
                double beta) {
  return eiv_soft_rows(beta, q_old.row(state), q_new.row(state));
}

double bound_q(double td, double alpha) { return alpha * std::abs(td); }

std::pair<double, double> bounds_soft(double td, double pi_old_ak,
                                      double pi_new_ak) {
  const double lo = std::min(pi_old_ak, pi_new_ak);
  const double hi = std::max(pi_old_ak, pi_new_ak);
  return {lo * std::abs(td), hi * std::abs(td)};
}

bool record_within_bounds(const MetricRecord& r, double bound_tol) {
  const double additivity_tol =
      is_fa(r.flavor) ? std::max(bound_tol, 1e-7) : bound_tol;
  if (std::abs(r.evb) > r.upper_bound + bound_tol) return false;
  if (std::abs(r.piv) > r.upper_bound + bound_tol) return false;
  if (std::abs(r.eiv) > r.upper_bound + bound_tol) return false;
  if (r.piv < -bound_tol) return false;
  if (std::abs(r.evb - (r.piv + r.eiv)) > additivity_tol) return false;
  if (is_soft(r.flavor)) {
    if (std::abs(r.evb) < r.lower_bound - bound_tol) return false;
    if (std::abs(r.eiv) < r.lower_bound - bound_tol) return false;
  }
  return true;
}

MetricRecord metric_record_rows(std::span<const double> row_old,
                                std::span<const double> row_new, int action,
                                double td, Flavor flavor,
                                double effective_alpha, double beta) {
  MetricRecord r;
  r.flavor = flavor;
  r.td = td;
  if (is_soft(flavor)) {
    r.evb = evb_soft_rows(beta, row_old, row_new);
    r.piv = piv_soft_rows(beta, row_old, row_new);
    r.eiv = eiv_soft_rows(beta, row_old, row_new);
    const auto p_old = softmax(beta, row_old);
    const auto p_new = softmax(beta, row_new);
    r.rho_max = std::max(p_old[action], p_new[action]);
    r.rho_min = std::min(p_old[action], p_new[action]);
    const auto [lo, hi] = bounds_soft(td, p_old[action], p_new[action]);
    r.lower_bound = lo;
    r.upper_bound = hi;
  } else {
    r.evb = evb_greedy_rows(row_old, row_new);
    r.piv = piv_greedy_rows(row_old, row_new);
    r.eiv = eiv_greedy_rows(row_old, row_new);
    const std::size_t a = static_cast<std::size_t>(action);
    r.rho_max = argmax_tiebreak(row_old) == a || argmax_tiebreak(row_new) == a
                    ? 1.0
                    : 0.0;
    r.rho_min = argmax_tiebreak(row_old) == a && argmax_tiebreak(row_new) == a
                    ? 1.0
                    : 0.0;
    r.upper_bound = bound_q(td, effective_alpha);
    r.lower_bound = 0.0;
  }
  r.violation = !record_within_bounds(r, kMetricTolerance);
  return r;
}

MetricRecord metric_record_tabular(const QTable& q_old, const QTable& q_new,
                                   const TabExperience& e, Flavor flavor,
                                   double alpha, double beta, double gamma) {
  const double td = is_soft(flavor) ? soft_td_error(q_old, e, beta, gamma)
                                    : td_error(q_old, e, gamma);
  return metric_record_rows(q_old.row(e.state), q_new.row(e.state), e.action,
                            td, flavor, alpha, beta);
}

}  // namespace rv
