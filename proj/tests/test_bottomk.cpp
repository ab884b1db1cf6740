#include <doctest.h>

#include <cmath>
#include <numbers>

#include "luce/bottomk.hpp"
#include "luce/error.hpp"
#include "luce/quadrature.hpp"
#include "oracles.hpp"

using namespace luce;
using namespace luce::bottomk;

namespace {

/// For k labels the inner integrals collapse: the bottom pmf equals
/// c * int_0^inf theta_{a_k} e^{-(theta_{a_1}+...+theta_{a_k}) x} prod_{i not in a}(1 - e^{-theta_i x}) dx
/// with c = prod_{j<k} theta_{a_j} / (theta_{a_1} + ... + theta_{a_j}).
double reduced_bottom_pmf(const std::vector<double>& theta_a, const std::vector<double>& others) {
  double c = 1.0, partial = 0.0;
  for (std::size_t j = 0; j + 1 < theta_a.size(); ++j) {
    partial += theta_a[j];
    c *= theta_a[j] / partial;
  }
  const double rate = partial + theta_a.back();
  auto f = [&](double u) {  // x = -log(u) / rate
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double x = -std::log(u) / rate;
    double prod = 1.0;
    for (double t : others) prod *= -std::expm1(-t * x);
    return theta_a.back() / rate * prod;
  };
  luce::quad::Options o;
  o.abs_tol = 1e-13;
  o.rel_tol = 1e-12;
  o.max_panels = 20000;
  return c * luce::quad::integrate(f, 0.0, 1.0, o).value;
}

std::vector<double> linear_others(std::size_t n, const std::vector<int>& bottom) {
  std::vector<double> out;
  for (std::size_t i = 1; i <= n; ++i)
    if (std::find(bottom.begin(), bottom.end(), static_cast<int>(i)) == bottom.end())
      out.push_back(static_cast<double>(i));
  return out;
}

} // namespace

TEST_CASE("f(x) for the analytic families") {
  const auto lin = f_eval(linear_sequence(), 1.0, 1e-12);
  CHECK_FALSE(lin.diverges);
  CHECK(lin.value == doctest::Approx(1.0 / (std::numbers::e - 1.0)).epsilon(1e-11));
  CHECK(lin.certified);
  CHECK(f_eval(constant_sequence(), 3.0, 1e-9).diverges);
  const double beta = 1.7;
  const auto lg = f_eval(log_sequence(beta), 2.0 / beta, 1e-9);
  CHECK_FALSE(lg.diverges);
  CHECK(std::abs(lg.value - (std::numbers::pi * std::numbers::pi / 6 - 1.0)) <= 1e-9);
  CHECK(f_eval(log_sequence(1.0), 1.0, 1e-9).diverges);
  CHECK_THROWS_AS(f_eval(linear_sequence(), 0.0, 1e-9), InvalidArgument);
  CHECK_THROWS_AS(f_eval(linear_sequence(), -1.0, 1e-9), InvalidArgument);
}

TEST_CASE("tail brackets contain the tails") {
  const std::vector<WeightSequence> seqs{linear_sequence(0.5), log_sequence(1.3), log_loglog_sequence()};
  for (const auto& seq : seqs)
    for (double x : {1.2, 2.0, 4.0})
      for (std::size_t n : {0u, 1u, 8u, 64u, 1024u}) {
        // Reference tail: direct terms to far, then the far bracket midpoint.
        const std::size_t far = 1 << 16;
        double direct = 0.0, direct_sq = 0.0;
        for (std::size_t i = n + 1; i <= far; ++i) {
          const double e = std::exp(-seq.theta(i) * x);
          direct += e;
          direct_sq += e * e;
        }
        const auto rest = seq.tail_bracket(far, x);
        const auto b = seq.tail_bracket(n, x);
        CHECK(b.lo <= b.hi);
        CHECK(b.lo <= (direct + rest.hi) * (1 + 1e-12));
        CHECK(b.hi >= (direct + rest.lo) * (1 - 1e-12));
        CHECK(b.sq_lo <= (direct_sq + rest.sq_hi) * (1 + 1e-12));
        CHECK(b.sq_hi >= (direct_sq + rest.sq_lo) * (1 - 1e-12));
        CHECK(seq.tail_bound(n, x) == b.hi);
      }
  CHECK(std::isinf(log_loglog_sequence().tail_bound(10, 0.99)));
  CHECK(std::isinf(log_sequence(1.0).tail_bound(10, 1.0)));
}

TEST_CASE("custom sequences without tail bounds use the window heuristic") {
  const auto geometric = custom_sequence([](std::size_t i) { return 2.0 * double(i); });
  const auto v = f_eval(geometric, 0.5, 1e-10);
  CHECK_FALSE(v.diverges);
  CHECK_FALSE(v.certified);
  CHECK(v.value == doctest::Approx(1.0 / (std::numbers::e - 1.0)).epsilon(1e-8));
  const auto flat = custom_sequence([](std::size_t) { return 1.0; });
  CHECK(f_eval(flat, 1.0, 1e-9).diverges);
}

TEST_CASE("convergence classification of the analytic families") {
  const auto lin = convergence_test(linear_sequence());
  CHECK(lin.converges);
  CHECK(lin.x0 == 0.0);
  CHECK(lin.method == Method::analytic);
  CHECK_FALSE(lin.caveat);
  const auto con = convergence_test(constant_sequence());
  CHECK_FALSE(con.converges);
  CHECK(std::isinf(con.x0));
  const auto lg = convergence_test(log_sequence(1.0));
  CHECK(lg.converges);
  CHECK(lg.x0 == doctest::Approx(1.0));
  CHECK(lg.f_at_x0_infinite);
  const auto ll = convergence_test(log_loglog_sequence());
  CHECK_FALSE(ll.converges);
  CHECK(ll.x0 == doctest::Approx(1.0));
  CHECK_FALSE(ll.f_at_x0_infinite);
  for (const auto& r : {lin, con, lg, ll}) CHECK(r.converges == (std::isfinite(r.x0) && r.f_at_x0_infinite));
}

TEST_CASE("custom classification is best effort and flagged") {
  const auto lin = convergence_test(custom_sequence([](std::size_t i) { return double(i); }));
  CHECK(lin.method == Method::numeric_best_effort);
  CHECK(lin.caveat);
  CHECK(lin.converges);
  CHECK(lin.x0 == 0.0);
  const auto flat = convergence_test(custom_sequence([](std::size_t) { return 2.0; }));
  CHECK(flat.caveat);
  CHECK_FALSE(flat.converges);
  // theta_i = 2 log(i+1): x0 = 1/2 with a harmonic series there.
  const auto lg = convergence_test(custom_sequence([](std::size_t i) { return 2.0 * std::log(double(i) + 1); }));
  CHECK(lg.caveat);
  CHECK(lg.x0 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(lg.converges);
  auto decreasing = custom_sequence([](std::size_t i) { return 1.0 / double(i); });
  decreasing.monotone = false;
  CHECK_THROWS_AS(convergence_test(decreasing), InvalidArgument);
}

TEST_CASE("last-card table matches the published values") {
  const auto rows = sukhatme_last_card_table(10, 1e-9);
  const auto& published = oracle::published_last_card_table();
  REQUIRE(rows.size() == 10);
  double sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i].probability - published[i]) <= 1e-5);
    CHECK(rows[i].probability > 0.0);
    if (i > 0) CHECK(rows[i].probability < rows[i - 1].probability);
    sum += rows[i].probability;
  }
  double published_sum = 0.0;
  for (double p : published) published_sum += p;
  CHECK(std::abs(sum - published_sum) <= 1e-5);
  CHECK(sum < 1.0);
  CHECK_THROWS_AS(sukhatme_last_card_table(0), InvalidArgument);
}

TEST_CASE("general quadrature agrees with the y-substituted table") {
  const auto seq = linear_sequence();
  for (int label : {1, 2, 5, 10}) {
    const std::vector<int> a{label};
    const auto v = limit_bottom_pmf(seq, a);
    CHECK(v.method == PmfMethod::quadrature);
    CHECK_FALSE(v.defective);
    CHECK(v.truncation_certified);
    CHECK(std::abs(v.value - sukhatme_last_card_row(label).probability) <= 1e-8);
  }
}

TEST_CASE("finite n bottom pmf against enumeration") {
  const std::vector<int> one{1};
  CHECK(finite_n_bottom_pmf(WeightVector({4.0}), one).value == doctest::Approx(1.0));
  CHECK(std::abs(finite_n_bottom_pmf(WeightVector({1, 2, 3}), one).value -
                 oracle::last_card_probability({1, 2, 3}, 1)) <= 1e-10);
  std::mt19937_64 gen(3);
  for (int n = 2; n <= 7; ++n) {
    const auto theta = oracle::random_weights(gen, static_cast<std::size_t>(n), 0.2, 3.0);
    for (int a = 1; a <= n; ++a) {
      const std::vector<int> bottom{a};
      CHECK(std::abs(finite_n_bottom_pmf(WeightVector(theta), bottom).value -
                     oracle::last_card_probability(theta, a)) <= 1e-8);
    }
  }
  std::vector<double> lin(7);
  std::iota(lin.begin(), lin.end(), 1.0);
  CHECK(std::abs(finite_n_bottom_pmf(WeightVector(lin), one).value - oracle::last_card_probability(lin, 1)) <= 1e-8);
}

TEST_CASE("finite n bottom pmf for k = 2, 3 against enumeration") {
  const std::vector<double> theta{0.7, 1.1, 1.9, 2.4, 3.0};
  for (const auto& bottom : std::vector<std::vector<int>>{{2, 5}, {1, 3}, {4, 1, 2}, {5, 3, 1}}) {
    double expected = 0.0;
    for (const auto& p : oracle::all_permutations(5)) {
      bool match = true;
      for (std::size_t j = 0; j < bottom.size(); ++j) match = match && p[4 - j] == bottom[j];
      if (match) expected += oracle::draw_probability(theta, p);
    }
    CHECK(std::abs(finite_n_bottom_pmf(WeightVector(theta), bottom).value - expected) <= 1e-8);
  }
}

TEST_CASE("nested quadrature matches the collapsed one-dimensional form") {
  const std::size_t n = 30;
  std::vector<double> lin(n);
  std::iota(lin.begin(), lin.end(), 1.0);
  for (const auto& bottom : std::vector<std::vector<int>>{{1, 2}, {3, 1}, {2, 1, 4}}) {
    std::vector<double> ta;
    for (int a : bottom) ta.push_back(double(a));
    const double expected = reduced_bottom_pmf(ta, linear_others(n, bottom));
    CHECK(std::abs(finite_n_bottom_pmf(WeightVector(lin), bottom).value - expected) <= 1e-8);
  }
}

TEST_CASE("monte carlo path for k > 3") {
  const std::vector<int> bottom{1, 2, 3, 4};
  QuadratureOptions opt;
  opt.mc_samples = 400'000;
  const auto v = limit_bottom_pmf(linear_sequence(), bottom, opt);
  CHECK(v.method == PmfMethod::monte_carlo);
  const double expected = reduced_bottom_pmf({1, 2, 3, 4}, linear_others(200, bottom));
  CHECK(std::abs(v.value - expected) <= std::max(3.0 * v.error, 1e-6));
  CHECK(v.error < 0.02 * expected);
}

TEST_CASE("finite n converges monotonically to the limit") {
  const double limit = oracle::published_last_card_table()[0];
  const std::vector<int> one{1};
  double prev_gap = 1.0;
  for (std::size_t n : {10u, 20u, 40u, 80u}) {
    std::vector<double> lin(n);
    std::iota(lin.begin(), lin.end(), 1.0);
    const double gap = std::abs(finite_n_bottom_pmf(WeightVector(lin), one).value - limit);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-3);
}

TEST_CASE("doubling the truncation point leaves outputs unchanged") {
  const double tol = 1e-9;
  for (int label : {1, 3, 7}) {
    const double a = sukhatme_last_card_row(label, tol, 1).probability;
    const double b = sukhatme_last_card_row(label, tol, 2).probability;
    CHECK(std::abs(a - b) < tol);
  }
  QuadratureOptions base, doubled;
  doubled.term_multiplier = 2;
  for (const auto& seq : {linear_sequence(), log_sequence(1.0), linear_sequence(0.3)})
    for (const auto& bottom : std::vector<std::vector<int>>{{1}, {2}, {2, 1}}) {
      const double a = limit_bottom_pmf(seq, bottom, base).value;
      const double b = limit_bottom_pmf(seq, bottom, doubled).value;
      CHECK(std::abs(a - b) < base.tol);
    }
}

TEST_CASE("marginalizing the second bottom label recovers the first") {
  const auto seq = linear_sequence();
  const std::vector<int> one{1};
  const double target = limit_bottom_pmf(seq, one).value;
  double acc = 0.0, prev = 0.0;
  for (int a2 = 2; a2 <= 30; ++a2) {
    const std::vector<int> pair{1, a2};
    acc += limit_bottom_pmf(seq, pair).value;
    CHECK(acc >= prev);
    prev = acc;
  }
  CHECK(acc <= target + 1e-8);
  CHECK(target - acc < 1e-3);
}

TEST_CASE("divergent-regime masses are flagged and stay below one") {
  const auto seq = log_loglog_sequence();
  double total = 0.0;
  std::vector<double> partial;
  for (int a = 1; a <= 40; ++a) {
    const std::vector<int> one{a};
    const auto v = limit_bottom_pmf(seq, one);
    CHECK(v.defective);
    total += v.value;
    partial.push_back(total);
  }
  CHECK(total < 1.0);
  // Growth flattens: the last twenty labels add less than the first twenty.
  CHECK(partial[39] - partial[19] < partial[19]);
}

TEST_CASE("bottom label validation") {
  const std::vector<int> none;
  const std::vector<int> dup{2, 2};
  const std::vector<int> zero{0};
  CHECK_THROWS_AS(limit_bottom_pmf(linear_sequence(), none), InvalidArgument);
  CHECK_THROWS_AS(limit_bottom_pmf(linear_sequence(), dup), InvalidArgument);
  CHECK_THROWS_AS(limit_bottom_pmf(linear_sequence(), zero), InvalidArgument);
  const std::vector<int> big{4};
  CHECK_THROWS_AS(finite_n_bottom_pmf(WeightVector({1, 2, 3}), big), InvalidArgument);
}
