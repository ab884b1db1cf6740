#include "luce/bottomk.hpp"

#include <algorithm>
#include <cmath>

#include "luce/error.hpp"
#include "luce/quadrature.hpp"
#include "luce/rng.hpp"

namespace luce::bottomk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(-700) is below every tolerance in use; products under it are zero.
constexpr double kLogFloor = -700.0;

/// Lazily extended table of theta_1..theta_N for one computation.
class ThetaCache {
public:
  explicit ThetaCache(const WeightSequence& seq) : seq_(seq) {}

  double operator()(std::size_t i) {
    while (values_.size() < i) {
      const double v = seq_.theta(values_.size() + 1);
      if (!std::isfinite(v) || !(v > 0.0))
        throw InvalidArgument("weight sequence entry " + std::to_string(values_.size() + 1) +
                              " must be positive and finite");
      values_.push_back(v);
    }
    return values_[i - 1];
  }

private:
  const WeightSequence& seq_;
  std::vector<double> values_;
};

struct LogProduct {
  double value = 0.0; // log of the product; kLogFloor-or-below means zero
  bool certified = true;
};

/// Bracket for the tail past n. Families supply their own; otherwise the
/// upper bound is paired with trivial lower bounds.
TailBracket tail_bracket_at(const WeightSequence& seq, ThetaCache& theta, std::size_t n, double x) {
  if (seq.tail_bracket) return seq.tail_bracket(n, x);
  TailBracket b;
  if (!seq.tail_bound) return b;
  b.hi = seq.tail_bound(n, x);
  // Monotone terms are all at most the first one past n.
  b.sq_hi = seq.monotone ? std::exp(-theta(n + 1) * x) * b.hi : b.hi * b.hi;
  return b;
}

/// Bracket for sum_{i>n} log(1 - e_i) from a bracket on the e_i, using
/// -e - e^2 / (2(1 - e)) <= log(1 - e) <= -e - e^2/2.
std::pair<double, double> log_tail_bracket(const TailBracket& b, double largest_term) {
  if (!std::isfinite(b.hi) || largest_term >= 1.0) return {-kInf, 0.0};
  return {-b.hi - b.sq_hi / (2.0 * (1.0 - largest_term)), -b.lo - 0.5 * b.sq_lo};
}

/// log prod_{i not in excluded} (1 - exp(-theta_i x)) over the infinite
/// sequence. The partial product is closed off with the midpoint of the
/// tail bracket once that bracket is narrower than tail_tol; a divergent
/// tail makes the product zero.
LogProduct log_infinite_product(const WeightSequence& seq, ThetaCache& theta, double x,
                                std::span<const int> excluded, const QuadratureOptions& opt) {
  LogProduct out;
  if (!(x > 0.0)) {
    out.value = -kInf;
    return out;
  }
  const bool bounded = seq.tail_bound || seq.tail_bracket;
  const std::size_t multiplier = std::max<std::size_t>(1, opt.term_multiplier);
  std::size_t next_check = 16;
  std::size_t stop_at = 0;
  auto close_off = [&](std::size_t n) {
    const auto b = tail_bracket_at(seq, theta, n, x);
    const double largest = seq.monotone ? std::exp(-theta(n + 1) * x) : b.hi;
    const auto [lo, hi] = log_tail_bracket(b, largest);
    out.value += 0.5 * (lo + hi);
    if (out.value < kLogFloor) out.value = -kInf;
  };
  for (std::size_t i = 1; i <= opt.max_terms; ++i) {
    const bool skip = std::find(excluded.begin(), excluded.end(), static_cast<int>(i)) !=
                      excluded.end();
    const double term = std::exp(-theta(i) * x);
    if (!skip) out.value += std::log1p(-term);
    if (out.value < kLogFloor) {
      out.value = -kInf;
      return out;
    }
    if (stop_at == 0 && bounded && i == next_check) {
      next_check *= 2;
      const auto b = tail_bracket_at(seq, theta, i, x);
      if (!std::isfinite(b.hi)) {
        // sum e_i diverges, so prod (1 - e_i) = 0.
        out.value = -kInf;
        return out;
      }
      const double largest = seq.monotone ? std::exp(-theta(i + 1) * x) : b.hi;
      const auto [lo, hi] = log_tail_bracket(b, largest);
      if (hi - lo <= opt.tail_tol) stop_at = i * multiplier;
    } else if (stop_at == 0 && !bounded && seq.monotone && term < opt.tail_tol * 1e-3) {
      // Terms are decreasing but nothing bounds their sum.
      out.certified = false;
      stop_at = i * multiplier;
    }
    if (stop_at != 0 && i >= stop_at) {
      if (bounded) close_off(i);
      return out;
    }
  }
  out.certified = false;
  if (bounded) close_off(opt.max_terms);
  return out;
}

/// I_m(t) = int_t^inf theta_{a_m} e^{-theta_{a_m} s} I_{m-1}(s) ds, I_0 = 1.
/// The last level is exact; deeper levels use v = exp(-theta (s - t)).
double nested_tail(std::span<const double> thetas, std::size_t m, double t, double tol) {
  if (m == 0) return 1.0;
  const double theta = thetas[m - 1];
  if (m == 1) return std::exp(-theta * t);
  quad::Options qo;
  qo.abs_tol = tol;
  qo.rel_tol = tol;
  const auto r = quad::integrate(
      [&](double v) { return nested_tail(thetas, m - 1, t - std::log(v) / theta, tol); }, 0.0,
      1.0, qo);
  return std::exp(-theta * t) * r.value;
}

void check_bottom_labels(std::span<const int> bottom, std::size_t n_max) {
  if (bottom.empty()) throw InvalidArgument("need at least one bottom label");
  for (std::size_t j = 0; j < bottom.size(); ++j) {
    if (bottom[j] < 1 || static_cast<std::size_t>(bottom[j]) > n_max)
      throw InvalidArgument("bottom label " + std::to_string(bottom[j]) + " out of range");
    for (std::size_t m = 0; m < j; ++m)
      if (bottom[m] == bottom[j])
        throw InvalidArgument("bottom labels must be distinct; " + std::to_string(bottom[j]) +
                              " repeats");
  }
}

/// Shared driver. `log_product(x)` is log prod_{i not in a}(1 - e^{-theta_i x}).
template <class LogProductFn>
BottomPmf bottom_pmf(std::span<const double> thetas, LogProductFn&& log_product,
                     const QuadratureOptions& opt) {
  const std::size_t k = thetas.size();
  BottomPmf out;
  const double last = thetas[k - 1];
  if (k <= kMaxNestedK) {
    quad::Options qo;
    qo.abs_tol = opt.tol;
    qo.rel_tol = 0.0;
    qo.max_panels = 4000;
    const double inner_tol = opt.tol * 0.1;
    // u = exp(-theta_{a_k} x_k) turns theta e^{-theta x} dx into du.
    const auto r = quad::integrate(
        [&](double u) {
          const double x = -std::log(u) / last;
          const double lp = log_product(x);
          if (lp == -kInf) return 0.0;
          return nested_tail(thetas, k - 1, x, inner_tol) * std::exp(lp);
        },
        0.0, 1.0, qo);
    out.value = r.value;
    out.error = r.error;
    out.method = PmfMethod::quadrature;
    return out;
  }
  // Importance sampling with the k exponential factors as the proposal.
  RngStream rng(opt.seed);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> xs(k);
  for (std::size_t s = 0; s < opt.mc_samples; ++s) {
    for (std::size_t j = 0; j < k; ++j) xs[j] = rng.exponential() / thetas[j];
    bool ordered = true;
    for (std::size_t j = 1; j < k && ordered; ++j) ordered = xs[j - 1] > xs[j];
    double weight = 0.0;
    if (ordered) {
      const double lp = log_product(xs[k - 1]);
      weight = lp == -kInf ? 0.0 : std::exp(lp);
    }
    sum += weight;
    sum_sq += weight * weight;
  }
  const double n = static_cast<double>(opt.mc_samples);
  out.value = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.value * out.value);
  out.error = std::sqrt(var / n);
  out.method = PmfMethod::monte_carlo;
  return out;
}

/// Growth of doubling windows of sum_i exp(-theta_i x): returns the last
/// window ratio and the partial sum through `max_terms`.
struct WindowScan {
  double partial = 0.0;
  double last_window = 0.0;
  double ratio = 0.0;
  int steady_windows = 0; // consecutive windows with ratio >= divergence threshold
  std::size_t terms = 0;
};

/// sum_{i >= m} g(i) for convex decreasing g with antiderivative tail
/// I(T) = int_T^inf g: the trapezoid rule gives I(m) + g(m)/2 from below and
/// the midpoint rule gives I(m - 1/2) from above.
template <class G, class I>
std::pair<double, double> convex_tail(G g, I integral, std::size_t m) {
  const double t = static_cast<double>(m);
  return {integral(t) + 0.5 * g(t), integral(t - 0.5)};
}

/// int_L^inf e^{(1-a) s} s^{-b} ds for a >= 1, b > 1, via s = L/u.
double log_power_tail(double a, double b, double big_l) {
  if (a == 1.0) return std::pow(big_l, 1.0 - b) / (b - 1.0);
  quad::Options qo;
  qo.abs_tol = 0.0;
  qo.rel_tol = 1e-13;
  const auto r = quad::integrate(
      [&](double u) {
        if (u <= 0.0) return 0.0;
        return std::exp((1.0 - a) * big_l / u) * std::pow(u, b - 2.0);
      },
      0.0, 1.0, qo);
  return std::pow(big_l, 1.0 - b) * r.value;
}

} // namespace

std::string to_string(Family family) {
  switch (family) {
  case Family::linear: return "linear";
  case Family::constant: return "constant";
  case Family::log: return "log";
  case Family::log_loglog: return "log-loglog";
  case Family::custom: return "custom";
  }
  return "custom";
}

WeightSequence linear_sequence(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope))
    throw InvalidArgument("linear sequence slope must be positive");
  WeightSequence s;
  s.evaluator = [slope](std::size_t i) { return slope * static_cast<double>(i); };
  // Geometric: sum_{i>N} e^{-c i x} = e^{-c(N+1)x} / (1 - e^{-cx}).
  auto geometric = [slope](std::size_t n, double x) {
    return std::exp(-slope * static_cast<double>(n + 1) * x) / -std::expm1(-slope * x);
  };
  s.tail_bound = geometric;
  s.tail_bracket = [geometric](std::size_t n, double x) {
    const double t = geometric(n, x), t2 = geometric(n, 2.0 * x);
    return TailBracket{t, t, t2, t2};
  };
  s.family = Family::linear;
  s.parameter = slope;
  return s;
}

WeightSequence constant_sequence(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw InvalidArgument("constant sequence value must be positive");
  WeightSequence s;
  s.evaluator = [value](std::size_t) { return value; };
  s.tail_bound = [](std::size_t, double) { return kInf; };
  s.tail_bracket = [](std::size_t, double) { return TailBracket{}; };
  s.family = Family::constant;
  s.parameter = value;
  return s;
}

WeightSequence log_sequence(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw InvalidArgument("log sequence beta must be positive");
  WeightSequence s;
  s.evaluator = [beta](std::size_t i) { return beta * std::log(static_cast<double>(i) + 1.0); };
  // Term i is g(i) = (i+1)^{-p}, p = beta x; int_T^inf g = (T+1)^{1-p} / (p-1).
  s.tail_bracket = [beta](std::size_t n, double x) {
    const double p = beta * x;
    if (p <= 1.0) return TailBracket{};
    auto integral = [](double q) {
      return [q](double t) { return std::pow(t + 1.0, 1.0 - q) / (q - 1.0); };
    };
    auto term = [](double q) { return [q](double t) { return std::pow(t + 1.0, -q); }; };
    const auto [lo, hi] = convex_tail(term(p), integral(p), n + 1);
    const auto [sq_lo, sq_hi] = convex_tail(term(2 * p), integral(2 * p), n + 1);
    return TailBracket{lo, hi, sq_lo, sq_hi};
  };
  s.tail_bound = [bracket = s.tail_bracket](std::size_t n, double x) { return bracket(n, x).hi; };
  s.family = Family::log;
  s.parameter = beta;
  return s;
}

WeightSequence log_loglog_sequence() {
  WeightSequence s;
  s.evaluator = [](std::size_t i) {
    const double m = static_cast<double>(std::max<std::size_t>(i, 2)) + 1.0;
    return std::log(m) + 2.0 * std::log(std::log(m));
  };
  // Term i >= 2 is g(i) = m^{-x} (log m)^{-2x} with m = i + 1, convex and
  // decreasing; squares have the same shape with x doubled.
  s.tail_bracket = [](std::size_t n, double x) {
    if (x < 1.0) return TailBracket{};
    const std::size_t m = std::max<std::size_t>(n + 1, 2);
    auto term = [](double a) {
      return [a](double t) { return std::pow(t + 1.0, -a) * std::pow(std::log(t + 1.0), -2.0 * a); };
    };
    auto integral = [](double a) {
      return [a](double t) { return log_power_tail(a, 2.0 * a, std::log(t + 1.0)); };
    };
    auto [lo, hi] = convex_tail(term(x), integral(x), m);
    auto [sq_lo, sq_hi] = convex_tail(term(2 * x), integral(2 * x), m);
    // theta_1 copies theta_2, so term 1 is added exactly.
    for (std::size_t i = n + 1; i < m; ++i) {
      const double g = std::exp(-x * (std::log(3.0) + 2.0 * std::log(std::log(3.0))));
      lo += g;
      hi += g;
      sq_lo += g * g;
      sq_hi += g * g;
    }
    return TailBracket{lo, hi, sq_lo, sq_hi};
  };
  s.tail_bound = [bracket = s.tail_bracket](std::size_t n, double x) { return bracket(n, x).hi; };
  s.family = Family::log_loglog;
  return s;
}

WeightSequence custom_sequence(std::function<double(std::size_t)> evaluator,
                               std::function<double(std::size_t, double)> tail_bound) {
  if (!evaluator) throw InvalidArgument("custom sequence needs an evaluator");
  WeightSequence s;
  s.evaluator = std::move(evaluator);
  s.tail_bound = std::move(tail_bound);
  s.family = Family::custom;
  return s;
}

namespace {

WindowScan scan_windows(ThetaCache& theta, double x, std::size_t max_terms) {
  WindowScan scan;
  std::size_t begin = 1;
  double prev = 0.0;
  // Only whole windows, so a short final window cannot fake a decay.
  while (2 * begin <= max_terms + 1) {
    const std::size_t end = 2 * begin;
    double window = 0.0;
    for (std::size_t i = begin; i < end; ++i) window += std::exp(-theta(i) * x);
    scan.partial += window;
    scan.terms = end - 1;
    if (begin >= 2 && prev > 0.0) {
      scan.ratio = window / prev;
      scan.steady_windows = scan.ratio >= kWindowDivergenceRatio ? scan.steady_windows + 1 : 0;
    }
    scan.last_window = window;
    prev = window;
    if (window == 0.0) break;
    begin = end;
  }
  return scan;
}

} // namespace

FValue f_eval(const WeightSequence& seq, double x, double tol, std::size_t max_terms) {
  if (!(x > 0.0)) throw InvalidArgument("f_eval needs x > 0; f(0) is infinite");
  if (!(tol > 0.0)) throw InvalidArgument("f_eval needs tol > 0");
  ThetaCache theta(seq);
  FValue out;
  if (seq.tail_bound || seq.tail_bracket) {
    double partial = 0.0;
    std::size_t n = 0;
    std::size_t check = 16;
    TailBracket b;
    while (true) {
      for (; n < check && n < max_terms; ++n) partial += std::exp(-theta(n + 1) * x);
      b = tail_bracket_at(seq, theta, n, x);
      if (!std::isfinite(b.hi)) {
        out.diverges = true;
        return out;
      }
      if (b.hi - b.lo <= 2.0 * tol || n >= max_terms) break;
      check *= 2;
    }
    out.value = partial + 0.5 * (b.lo + b.hi);
    out.error = 0.5 * (b.hi - b.lo);
    out.terms = n;
    out.certified = out.error <= tol;
    return out;
  }
  const auto scan = scan_windows(theta, x, max_terms);
  out.terms = scan.terms;
  if (scan.last_window == 0.0) {
    out.value = scan.partial;
    return out;
  }
  if (scan.steady_windows >= 3) {
    out.diverges = true;
    return out;
  }
  const double r = std::min(scan.ratio, kWindowDivergenceRatio);
  const double tail = scan.last_window * r / (1.0 - r);
  out.value = scan.partial + tail;
  out.error = tail;
  return out;
}

ConvergenceReport convergence_test(const WeightSequence& seq) {
  if (!seq.monotone)
    throw InvalidArgument("convergence_test needs a nondecreasing sequence");
  ConvergenceReport r;
  switch (seq.family) {
  case Family::linear:
    r.x0 = 0.0;
    r.f_at_x0_infinite = true;
    break;
  case Family::constant:
    r.x0 = kInf;
    r.f_at_x0_infinite = true;
    break;
  case Family::log:
    // f(x) = sum (i+1)^{-beta x}: finite iff beta x > 1, harmonic at x0.
    r.x0 = 1.0 / seq.parameter;
    r.f_at_x0_infinite = true;
    break;
  case Family::log_loglog:
    // f(x) = sum (i+1)^{-x} (log(i+1))^{-2x}: x0 = 1 and f(1) is finite.
    r.x0 = 1.0;
    r.f_at_x0_infinite = false;
    break;
  case Family::custom: {
    r.method = Method::numeric_best_effort;
    r.caveat = true;
    ThetaCache theta(seq);
    if (seq.tail_bound) {
      // Bisection on finiteness of the supplied bound.
      auto finite = [&](double x) { return std::isfinite(seq.tail_bound(16, x)); };
      constexpr double kTiny = 1e-8;
      if (finite(kTiny)) {
        r.x0 = 0.0;
        r.f_at_x0_infinite = true;
        break;
      }
      double hi = 1.0;
      while (!finite(hi) && hi < 1e8) hi *= 2.0;
      if (!finite(hi)) {
        r.x0 = kInf;
        r.f_at_x0_infinite = true;
        break;
      }
      double lo = kTiny;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (finite(mid) ? hi : lo) = mid;
      }
      r.x0 = hi;
    } else {
      // For nondecreasing theta, x0 = limsup log(i) / theta_i; sample it far out.
      auto index_ratio = [&](int m) {
        return static_cast<double>(m) * std::log(2.0) / seq.theta(std::size_t{1} << m);
      };
      const double near = index_ratio(40), far = index_ratio(60);
      if (far > kGrowthRatioLimit * near) {
        r.x0 = kInf;
        r.f_at_x0_infinite = true;
        break;
      }
      if (far < 1e-9) {
        r.x0 = 0.0;
        r.f_at_x0_infinite = true;
        break;
      }
      r.x0 = far;
    }
    const double hi = r.x0;
    const auto scan = scan_windows(theta, hi, std::size_t{1} << 22);
    r.f_at_x0_infinite = scan.last_window > 0.0 && scan.ratio >= kWindowDivergenceRatio;
    break;
  }
  }
  r.converges = std::isfinite(r.x0) && r.f_at_x0_infinite;
  return r;
}

BottomPmf limit_bottom_pmf(const WeightSequence& seq, std::span<const int> bottom,
                           const QuadratureOptions& options) {
  check_bottom_labels(bottom, std::numeric_limits<int>::max());
  if (!(options.tol > 0.0)) throw InvalidArgument("limit_bottom_pmf needs tol > 0");
  ThetaCache theta(seq);
  std::vector<double> thetas;
  for (int a : bottom) thetas.push_back(theta(static_cast<std::size_t>(a)));
  bool certified = true;
  auto log_product = [&](double x) {
    const auto lp = log_infinite_product(seq, theta, x, bottom, options);
    certified = certified && lp.certified;
    return lp.value;
  };
  auto out = bottom_pmf(thetas, log_product, options);
  out.truncation_certified = certified;
  out.defective = !convergence_test(seq).converges;
  return out;
}

BottomPmf finite_n_bottom_pmf(const WeightVector& w, std::span<const int> bottom,
                              const QuadratureOptions& options) {
  check_bottom_labels(bottom, w.size());
  std::vector<double> thetas;
  for (int a : bottom) thetas.push_back(w.theta(a));
  std::vector<double> others;
  for (std::size_t i = 1; i <= w.size(); ++i)
    if (std::find(bottom.begin(), bottom.end(), static_cast<int>(i)) == bottom.end())
      others.push_back(w.theta(static_cast<int>(i)));
  auto log_product = [&](double x) {
    double acc = 0.0;
    for (double t : others) {
      acc += std::log1p(-std::exp(-t * x));
      if (acc < kLogFloor) return -kInf;
    }
    return acc;
  };
  return bottom_pmf(thetas, log_product, options);
}

TableRow sukhatme_last_card_row(int label, double tol, std::size_t term_multiplier) {
  if (label < 1) throw InvalidArgument("label must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  const double tail_tol = std::min(1e-12, tol * 1e-3);
  const std::size_t multiplier = std::max<std::size_t>(1, term_multiplier);
  auto integrand = [&](double y) {
    if (y <= 0.0) return label == 1 ? 1.0 : 0.0;
    if (y >= 1.0) return 0.0;
    double log_prod = 0.0;
    double yj = 1.0;
    std::size_t stop_at = 0;
    for (std::size_t j = 1;; ++j) {
      yj *= y;
      if (static_cast<int>(j) != label) log_prod += std::log1p(-yj);
      if (log_prod < kLogFloor) return 0.0;
      // Geometric tail: sum_{i>j} y^i = y^{j+1} / (1 - y).
      if (stop_at == 0 && yj * y / (1.0 - y) <= tail_tol) stop_at = j * multiplier;
      if (stop_at != 0 && j >= stop_at) break;
    }
    return label * std::pow(y, label - 1) * std::exp(log_prod);
  };
  quad::Options qo;
  qo.abs_tol = tol;
  qo.rel_tol = 0.0;
  qo.max_panels = 4000;
  const auto r = quad::integrate(integrand, 0.0, 1.0, qo);
  if (!r.converged)
    throw NumericalFailure("last-card quadrature for label " + std::to_string(label) +
                           " did not reach tolerance");
  return {label, r.value, r.error};
}

std::vector<TableRow> sukhatme_last_card_table(int max_label, double tol,
                                               std::size_t term_multiplier) {
  if (max_label < 1) throw InvalidArgument("max_label must be >= 1");
  std::vector<TableRow> rows;
  for (int label = 1; label <= max_label; ++label)
    rows.push_back(sukhatme_last_card_row(label, tol, term_multiplier));
  return rows;
}

} // namespace luce::bottomk
