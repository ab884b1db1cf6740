#include "luce/topk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "luce/error.hpp"

namespace luce::topk {

namespace {

void require_normalized(const WeightVector& w, const char* op) {
  if (!w.is_normalized(kNormalizationTol))
    throw InvalidArgument(std::string(op) + ": weights must sum to 1 within 1e-9 (sum is " +
                          std::to_string(w.total()) + ")");
}

void require_k(const WeightVector& w, std::size_t k, const char* op) {
  if (k < 1 || k > w.size())
    throw InvalidArgument(std::string(op) + ": k must lie in 1.." + std::to_string(w.size()));
}

void require_labels(const WeightVector& w, std::span<const int> prefix) {
  if (prefix.empty() || prefix.size() > w.size())
    throw InvalidArgument("prefix length must lie in 1.." + std::to_string(w.size()));
  for (int a : prefix)
    if (a < 1 || static_cast<std::size_t>(a) > w.size())
      throw InvalidArgument("prefix label " + std::to_string(a) + " out of range");
}

std::vector<double> sorted_descending(const WeightVector& w) {
  std::vector<double> v(w.values().begin(), w.values().end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

} // namespace

double prefix_prob_p(const WeightVector& w, std::span<const int> prefix) {
  require_normalized(w, "prefix_prob_p");
  require_labels(w, prefix);
  std::vector<bool> seen(w.size(), false);
  for (int a : prefix) {
    if (seen[a - 1]) return 0.0;
    seen[a - 1] = true;
  }
  double p = 1.0;
  double used = 0.0;
  for (int a : prefix) {
    const double theta = w.theta(a);
    p *= theta / (w.total() - used);
    used += theta;
  }
  return p;
}

double prefix_prob_q(const WeightVector& w, std::span<const int> prefix) {
  require_normalized(w, "prefix_prob_q");
  require_labels(w, prefix);
  double q = 1.0;
  for (int a : prefix) q *= w.theta(a);
  return q;
}

double d_inf_exact(const WeightVector& w, std::size_t k) {
  require_normalized(w, "d_inf_exact");
  require_k(w, k, "d_inf_exact");
  const auto sorted = sorted_descending(w);
  double partial = 0.0;
  double ratio = 1.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    partial += sorted[j];
    ratio *= 1.0 - partial;
  }
  return 1.0 - ratio;
}

double d_inf_enumerate(const WeightVector& w, std::size_t k) {
  require_normalized(w, "d_inf_enumerate");
  require_k(w, k, "d_inf_enumerate");
  const auto n = w.size();
  std::vector<bool> used(n, false);
  double best = 0.0;
  // Depth-first over distinct (k-1)-prefixes; the k-th label only needs to
  // exist, which k <= n guarantees.
  std::function<void(std::size_t, double, double)> visit = [&](std::size_t depth, double partial,
                                                               double ratio) {
    if (depth + 1 == k) {
      best = std::max(best, 1.0 - ratio);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      const double s = partial + w.values()[i];
      visit(depth + 1, s, ratio * (1.0 - s));
      used[i] = false;
    }
  };
  visit(0, 0.0, 1.0);
  return best;
}

double d_inf_bound(const WeightVector& w, std::size_t k) {
  require_normalized(w, "d_inf_bound");
  require_k(w, k, "d_inf_bound");
  const auto sorted = sorted_descending(w);
  if (sorted.front() > 0.5)
    throw PreconditionViolation("d_inf_bound requires every weight <= 1/2; largest is " +
                                std::to_string(sorted.front()));
  double exponent = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j)
    exponent += static_cast<double>(k - 1 - j) * sorted[j];
  return -std::expm1(-2.0 * exponent);
}

bool d_inf_bound_certified(const WeightVector& w, std::size_t k) {
  require_normalized(w, "d_inf_bound_certified");
  require_k(w, k, "d_inf_bound_certified");
  const auto sorted = sorted_descending(w);
  if (sorted.front() > 0.5) return false;
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) s += sorted[j];
  return s <= kLogChordLimit;
}

long double elementary_symmetric(const WeightVector& w, std::size_t k) {
  if (k > w.size())
    throw InvalidArgument("elementary_symmetric: k must lie in 0.." + std::to_string(w.size()));
  std::vector<long double> e(k + 1, 0.0L);
  e[0] = 1.0L;
  std::size_t seen = 0;
  for (double theta : w.values()) {
    ++seen;
    for (std::size_t j = std::min(k, seen); j >= 1; --j) e[j] += theta * e[j - 1];
  }
  return e[k];
}

double tv_exact(const WeightVector& w, std::size_t k) {
  require_normalized(w, "tv_exact");
  require_k(w, k, "tv_exact");
  // Same recurrence on g_j = j! e_j, which stays in [0, 1] for normalized
  // weights and so never overflows the factorial.
  std::vector<long double> g(k + 1, 0.0L);
  g[0] = 1.0L;
  std::size_t seen = 0;
  for (double theta : w.values()) {
    ++seen;
    for (std::size_t j = std::min(k, seen); j >= 1; --j)
      g[j] += static_cast<long double>(j) * theta * g[j - 1];
  }
  return static_cast<double>(1.0L - g[k]);
}

double collision_lambda(const WeightVector& w, std::size_t k) {
  require_k(w, k, "collision_lambda");
  double sum_sq = 0.0;
  for (double theta : w.values()) sum_sq += theta * theta;
  const double pairs = 0.5 * static_cast<double>(k) * static_cast<double>(k - 1);
  return pairs * sum_sq;
}

double tv_poisson_approx(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("tv_poisson_approx: lambda must be >= 0");
  return -std::expm1(-lambda);
}

double tv_uniform_exact(std::size_t n, std::size_t k) {
  if (n == 0 || k < 1 || k > n) throw InvalidArgument("tv_uniform_exact: need 1 <= k <= n");
  double log_distinct = 0.0;
  for (std::size_t j = 1; j < k; ++j)
    log_distinct += std::log1p(-static_cast<double>(j) / static_cast<double>(n));
  return -std::expm1(log_distinct);
}

DistanceReport distance_report(const WeightVector& w, std::size_t k) {
  DistanceReport r;
  r.d_inf_exact = d_inf_exact(w, k);
  try {
    r.d_inf_bound = d_inf_bound(w, k);
    r.d_inf_bound_certified = d_inf_bound_certified(w, k);
  } catch (const PreconditionViolation&) {
    r.d_inf_bound.reset();
  }
  r.tv_exact = tv_exact(w, k);
  r.lambda = collision_lambda(w, k);
  r.tv_poisson = tv_poisson_approx(r.lambda);
  return r;
}

} // namespace luce::topk
