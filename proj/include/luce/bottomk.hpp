#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "luce/weights.hpp"

namespace luce::bottomk {

enum class Family { linear, constant, log, log_loglog, custom };

std::string to_string(Family family);

/// Two-sided control of the tail past N: sum_{i>N} exp(-theta_i x) lies in
/// [lo, hi] and sum_{i>N} exp(-2 theta_i x) in [sq_lo, sq_hi].
struct TailBracket {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double sq_lo = 0.0;
  double sq_hi = std::numeric_limits<double>::infinity();
};

/// An infinite weight sequence theta_1, theta_2, ... (1-based index).
///
/// `tail_bound(N, x)`, when present, must return an upper bound on
/// sum_{i>N} exp(-theta_i x), or +infinity when that sum diverges.
/// `tail_bracket`, when present, refines it with lower bounds and bounds on
/// the squared terms; the named families supply one.
struct WeightSequence {
  std::function<double(std::size_t)> evaluator;
  bool monotone = true;
  std::function<double(std::size_t, double)> tail_bound;
  std::function<TailBracket(std::size_t, double)> tail_bracket;
  Family family = Family::custom;
  /// Family parameter: slope for linear, value for constant, beta for log.
  double parameter = 1.0;

  double theta(std::size_t i) const { return evaluator(i); }
};

/// theta_i = slope * i.
WeightSequence linear_sequence(double slope = 1.0);
/// theta_i = value.
WeightSequence constant_sequence(double value = 1.0);
/// theta_i = beta * log(i + 1).
WeightSequence log_sequence(double beta = 1.0);
/// theta_i = log(i + 1) + 2 log log(i + 1) for i >= 2, and theta_1 = theta_2
/// because the formula is negative at i = 1.
WeightSequence log_loglog_sequence();
WeightSequence custom_sequence(std::function<double(std::size_t)> evaluator,
                               std::function<double(std::size_t, double)> tail_bound = {});

/// Outcome of summing f(x) = sum_i exp(-theta_i x).
struct FValue {
  bool diverges = false;
  double value = std::numeric_limits<double>::infinity();
  /// Bound on |value - f(x)|; certified when a tail bound drove the stop.
  double error = 0.0;
  std::size_t terms = 0;
  bool certified = false;
};

/// Partial sums plus tail control, stopping once the tail bracket is
/// narrower than 2 tol; the value is the bracket midpoint. Without a tail bound, partial sums are
/// grouped into doubling windows [2^m, 2^{m+1}); a window ratio that stays
/// at or above kWindowDivergenceRatio is read as divergence.
FValue f_eval(const WeightSequence& seq, double x, double tol,
              std::size_t max_terms = std::size_t{1} << 24);
inline constexpr double kWindowDivergenceRatio = 0.97;
/// Custom sequences without a tail bound: log(i)/theta_i at i = 2^60 more
/// than this multiple of its value at i = 2^40 is read as x0 = infinity.
inline constexpr double kGrowthRatioLimit = 1.3;

enum class Method { analytic, numeric_best_effort };

struct ConvergenceReport {
  /// +infinity when f is infinite everywhere.
  double x0 = std::numeric_limits<double>::infinity();
  bool f_at_x0_infinite = true;
  bool converges = false;
  Method method = Method::analytic;
  /// Set whenever the classification rests on a numerical heuristic.
  bool caveat = false;
};

ConvergenceReport convergence_test(const WeightSequence& seq);

struct QuadratureOptions {
  /// Absolute tolerance for the quadrature.
  double tol = 1e-9;
  /// The infinite product is cut once the tail bound is below this.
  double tail_tol = 1e-12;
  std::size_t max_terms = std::size_t{1} << 20;
  /// Keep term_multiplier times the certified number of terms. Used to
  /// check that doubling the truncation point does not move results.
  std::size_t term_multiplier = 1;
  /// Monte Carlo settings for k > kMaxNestedK.
  std::size_t mc_samples = 200'000;
  std::uint64_t seed = 0x5eed;
};

inline constexpr std::size_t kMaxNestedK = 3;

enum class PmfMethod { quadrature, monte_carlo };

struct BottomPmf {
  double value = 0.0;
  /// Quadrature error estimate, or the Monte Carlo standard error.
  double error = 0.0;
  PmfMethod method = PmfMethod::quadrature;
  /// The sequence fails the convergence criterion; masses may sum below 1.
  bool defective = false;
  /// Every product truncation was backed by a tail bound.
  bool truncation_certified = true;
};

/// lim_n P(last k draws, read from the bottom, are a_1..a_k) for the Luce
/// model on theta_1..theta_n.
BottomPmf limit_bottom_pmf(const WeightSequence& seq, std::span<const int> bottom,
                           const QuadratureOptions& options = {});

/// Same integral with the product over [n] minus {a}; equals the chance the
/// reversed draw order of the finite model starts a_1..a_k.
BottomPmf finite_n_bottom_pmf(const WeightVector& w, std::span<const int> bottom,
                              const QuadratureOptions& options = {});

struct TableRow {
  int label = 0;
  double probability = 0.0;
  double error = 0.0;
};

/// P(label is the last card) in the limit for theta_i = i, via y = exp(-x):
/// P = int_0^1 l y^{l-1} prod_{j != l} (1 - y^j) dy.
TableRow sukhatme_last_card_row(int label, double tol = 1e-9, std::size_t term_multiplier = 1);

/// Rows 1..max_label of the same table.
std::vector<TableRow> sukhatme_last_card_table(int max_label, double tol = 1e-9,
                                               std::size_t term_multiplier = 1);

} // namespace luce::bottomk
