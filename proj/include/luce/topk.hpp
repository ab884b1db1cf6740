#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "luce/weights.hpp"

namespace luce::topk {

/// Sum-to-one tolerance demanded by every operation that needs normalized weights.
inline constexpr double kNormalizationTol = 1e-9;

/// Law of the first k draws: prod theta_{s_j} / prod_{j<k}(1 - S_j), zero
/// when labels repeat. Labels are 1-based and need not be distinct.
double prefix_prob_p(const WeightVector& w, std::span<const int> prefix);

/// Product measure of k independent draws with replacement.
double prefix_prob_q(const WeightVector& w, std::span<const int> prefix);

/// max over distinct prefixes of 1 - Q/P. Closed form: the k-1 largest
/// weights in descending order maximize every partial sum at once.
double d_inf_exact(const WeightVector& w, std::size_t k);

/// Same quantity by enumerating every distinct (k-1)-prefix. Cost n!/(n-k+1)!.
double d_inf_enumerate(const WeightVector& w, std::size_t k);

/// 1 - exp(-2 sum_{j<k} (k-j) theta_(j)) with theta sorted descending.
/// Throws PreconditionViolation if some weight exceeds 1/2.
double d_inf_bound(const WeightVector& w, std::size_t k);

/// Largest x with -log(1 - x) <= 2x, the root of log(1 - x) = -2x.
inline constexpr double kLogChordLimit = 0.7968121300200199;

/// True when the inequality behind d_inf_bound applies to every partial
/// sum: all weights <= 1/2 and the k-1 largest sum to at most
/// kLogChordLimit. Outside this range d_inf_bound can undershoot d_inf_exact,
/// e.g. theta = (0.45, 0.45, 0.1), k = 3.
bool d_inf_bound_certified(const WeightVector& w, std::size_t k);

/// Total variation between the two measures, 1 - k! e_k(theta).
double tv_exact(const WeightVector& w, std::size_t k);

/// e_k by the triangular recurrence over prefixes of the weight list.
/// Accumulates in long double.
long double elementary_symmetric(const WeightVector& w, std::size_t k);

/// binom(k, 2) * sum theta_i^2.
double collision_lambda(const WeightVector& w, std::size_t k);

/// 1 - exp(-lambda).
double tv_poisson_approx(double lambda);

/// Exact TV for theta_i = 1/n: 1 - n!/((n-k)! n^k), evaluated in log space.
double tv_uniform_exact(std::size_t n, std::size_t k);

struct DistanceReport {
  std::optional<double> d_inf_exact;
  /// Absent when the bound's precondition (all theta <= 1/2) fails.
  std::optional<double> d_inf_bound;
  bool d_inf_bound_certified = false;
  double tv_exact = 0.0;
  double lambda = 0.0;
  double tv_poisson = 0.0;
};

DistanceReport distance_report(const WeightVector& w, std::size_t k);

} // namespace luce::topk
