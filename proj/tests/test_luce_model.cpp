#include <doctest.h>

#include <map>
#include <random>

#include "luce/error.hpp"
#include "luce/luce_model.hpp"
#include "oracles.hpp"

using namespace luce;

namespace {

Permutation perm(std::vector<int> v) { return Permutation(std::move(v)); }

} // namespace

TEST_CASE("pmf examples") {
  CHECK(luce_pmf(WeightVector({5.0}), perm({1})) == doctest::Approx(1.0));
  for (const auto& p : oracle::all_permutations(3))
    CHECK(luce_pmf(WeightVector({1, 1, 1}), perm(p)) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(luce_pmf(WeightVector({1, 2, 3}), perm({3, 2, 1})) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("pmf rejects mismatched or non-bijective orders") {
  CHECK_THROWS_AS(luce_pmf(WeightVector({1, 2}), perm({1, 2, 3})), InvalidArgument);
  CHECK_THROWS_AS(Permutation({1, 1, 2}), InvalidArgument);
  CHECK_THROWS_AS(Permutation({0, 1}), InvalidArgument);
  CHECK_THROWS_AS(WeightVector({1.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(WeightVector(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("pmf agrees with the step-by-step oracle and sums to one") {
  std::mt19937_64 gen(101);
  for (int n = 1; n <= 6; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto theta = oracle::random_weights(gen, static_cast<std::size_t>(n), 0.01, 10.0);
      const WeightVector w(theta);
      double total = 0.0;
      for (const auto& p : oracle::all_permutations(n)) {
        const double v = luce_pmf(w, perm(p));
        CHECK(v == doctest::Approx(oracle::draw_probability(theta, p)).epsilon(1e-12));
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("scale invariance and normalize") {
  std::mt19937_64 gen(5);
  const auto theta = oracle::random_weights(gen, 5);
  const WeightVector w(theta);
  std::vector<double> scaled = theta;
  for (double& t : scaled) t *= 37.5;
  const WeightVector ws(scaled);
  const auto wn = normalize(w);
  CHECK(std::abs(wn.total() - 1.0) <= 1e-12);
  for (const auto& p : oracle::all_permutations(5)) {
    CHECK(std::abs(luce_pmf(w, perm(p)) - luce_pmf(ws, perm(p))) <= 1e-12);
    CHECK(std::abs(luce_pmf(w, perm(p)) - luce_pmf(wn, perm(p))) <= 1e-12);
  }
  const auto half = normalize(WeightVector({1, 1}));
  CHECK(half.theta(1) == doctest::Approx(0.5));
  const auto sixths = normalize(WeightVector({1, 2, 3}));
  CHECK(sixths.theta(3) == doctest::Approx(0.5));
}

TEST_CASE("weight families") {
  CHECK(sukhatme_weights(3, Orientation::descending) == WeightVector({3, 2, 1}));
  CHECK(sukhatme_weights(3, Orientation::ascending) == WeightVector({1, 2, 3}));
  CHECK(sukhatme_weights(1, Orientation::ascending) == WeightVector({1}));
  CHECK_THROWS_AS(sukhatme_weights(0, Orientation::ascending), InvalidArgument);
  CHECK(uniform_weights(4) == WeightVector({1, 1, 1, 1}));
  CHECK(zipf_weights(3, 1.0).theta(3) == doctest::Approx(1.0 / 3));
}

TEST_CASE("restrict and irrelevance of alternatives") {
  const WeightVector w({1, 2, 3});
  const std::vector<int> all{1, 2, 3};
  CHECK(restrict(w, all) == w);
  const std::vector<int> pair{1, 3};
  const auto r = restrict(w, pair);
  CHECK(luce_pmf(r, perm({1, 2})) == doctest::Approx(0.25));
  const std::vector<int> repeated{1, 1};
  CHECK_THROWS_AS(restrict(w, repeated), InvalidArgument);
  const std::vector<int> out_of_range{4};
  CHECK_THROWS_AS(restrict(w, out_of_range), InvalidArgument);
  const std::vector<int> any_pair{2, 4};
  CHECK(luce_pmf(restrict(uniform_weights(4), any_pair), perm({2, 1})) == doctest::Approx(0.5));
}

TEST_CASE("marginal restriction consistency for n <= 6") {
  std::mt19937_64 gen(77);
  for (int n = 2; n <= 6; ++n) {
    const auto theta = oracle::random_weights(gen, static_cast<std::size_t>(n));
    const WeightVector w(theta);
    // A few ordered subsets of each size.
    for (int size = 1; size <= n; ++size) {
      std::vector<int> labels(static_cast<std::size_t>(n));
      std::iota(labels.begin(), labels.end(), 1);
      std::shuffle(labels.begin(), labels.end(), gen);
      const std::vector<int> subset(labels.begin(), labels.begin() + size);
      std::map<std::vector<int>, double> marginal;
      for (const auto& p : oracle::all_permutations(n)) {
        std::vector<int> rel;  // positions in `subset`, 1-based, in draw order
        for (int label : p) {
          const auto it = std::find(subset.begin(), subset.end(), label);
          if (it != subset.end()) rel.push_back(static_cast<int>(it - subset.begin()) + 1);
        }
        marginal[rel] += luce_pmf(w, perm(p));
      }
      const auto r = restrict(w, subset);
      for (const auto& [rel, mass] : marginal) CHECK(std::abs(mass - luce_pmf(r, perm(rel))) <= 1e-10);
    }
  }
}

TEST_CASE("second position marginal") {
  std::mt19937_64 gen(9);
  for (int n = 2; n <= 6; ++n) {
    const auto theta = oracle::random_weights(gen, static_cast<std::size_t>(n));
    const WeightVector w(theta);
    for (int l = 1; l <= n; ++l) {
      double s = 0.0;
      for (const auto& p : oracle::all_permutations(n))
        if (p[1] == l) s += oracle::draw_probability(theta, p);
      CHECK(second_position_marginal(w, l) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("bruhat covers") {
  const auto c = bruhat_covers(Permutation::identity(3));
  REQUIRE(c.size() == 2);
  CHECK(std::find(c.begin(), c.end(), perm({2, 1, 3})) != c.end());
  CHECK(std::find(c.begin(), c.end(), perm({1, 3, 2})) != c.end());
  CHECK(bruhat_covers(perm({3, 2, 1})).empty());
  CHECK(bruhat_covers(Permutation::identity(1)).empty());
}

TEST_CASE("pmf decreases down the weak order on S5 for sorted weights") {
  std::mt19937_64 gen(55);
  for (int rep = 0; rep < 10; ++rep) {
    auto theta = oracle::random_weights(gen, 5);
    std::sort(theta.rbegin(), theta.rend());
    const WeightVector w(theta);
    int violations = 0;
    for (const auto& p : oracle::all_permutations(5)) {
      const Permutation upper = perm(p);
      for (const auto& lower : bruhat_covers(upper))
        if (luce_pmf(w, lower) > luce_pmf(w, upper) * (1 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("both samplers fit the pmf (chi-square, level 0.001)") {
  const WeightVector w({0.4, 0.3, 0.2, 0.1});
  std::map<std::vector<int>, double> law;
  for (const auto& p : oracle::all_permutations(4)) law[p] = luce_pmf(w, perm(p));
  const std::size_t draws = 1'000'000;
  for (int method = 0; method < 2; ++method) {
    RngStream rng(2024 + method);
    std::map<std::vector<int>, std::size_t> counts;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto s = method == 0 ? sample_urn(w, rng) : sample_exponential(w, rng);
      ++counts[std::vector<int>(s.labels().begin(), s.labels().end())];
    }
    const auto [stat, critical] = oracle::chi_square(counts, law, draws, 0.001);
    CHECK(stat < critical);
    CHECK(oracle::tv_counts(counts, law, draws) <= 0.005);
  }
}

TEST_CASE("two-label samplers give the 3/4 head-to-head chance") {
  const WeightVector w({3, 1});
  RngStream a(1), b(2);
  int urn = 0, expo = 0;
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    urn += sample_urn(w, a)[0] == 1;
    expo += sample_exponential(w, b)[0] == 1;
  }
  CHECK(std::abs(urn / double(draws) - 0.75) <= 0.002);
  CHECK(std::abs(expo / double(draws) - 0.75) <= 0.002);
  RngStream c(3);
  CHECK(sample_urn(WeightVector({2.0}), c) == Permutation::identity(1));
  CHECK(sample_exponential(WeightVector({2.0}), c) == Permutation::identity(1));
}

TEST_CASE("tree-backed urn path for large n") {
  const std::size_t n = kUrnLinearLimit * 2;
  std::vector<double> theta(n, 1.0);
  theta[0] = static_cast<double>(n - 1);  // label 1 is first half the time
  const WeightVector w(theta);
  RngStream rng(8);
  int first = 0;
  const int draws = 400;
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_urn(w, rng);
    std::vector<int> sorted(s.labels().begin(), s.labels().end());
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted.front() == 1);
    REQUIRE(sorted.back() == static_cast<int>(n));
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    first += s[0] == 1;
  }
  CHECK(std::abs(first / double(draws) - 0.5) < 0.1);
}

TEST_CASE("spacings: scaled spacings are standard exponential") {
  const std::size_t n = 20, trials = 100'000;
  RngStream rng(31);
  std::vector<std::vector<double>> scaled(n);
  std::size_t smallest_first = 0, smallest_last = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto s = sample_spacings(n, rng);
    for (std::size_t j = 0; j < n; ++j) scaled[j].push_back(static_cast<double>(n - j) * s[j]);
    const auto m = std::min_element(s.begin(), s.end()) - s.begin();
    smallest_first += m == 0;
    smallest_last += m == static_cast<long>(n - 1);
  }
  for (std::size_t j = 0; j < n; ++j)
    CHECK(oracle::ks_exponential(scaled[j]) < oracle::ks_critical_001(trials));
  // The smallest spacing is the first with chance 2/(n+1); the last with 1/C(n+1,2).
  CHECK(std::abs(smallest_first / double(trials) - 2.0 / 21) <= 0.004);
  CHECK(std::abs(smallest_last / double(trials) - 1.0 / 210) <= 0.001);
  RngStream one(2);
  CHECK(sample_spacings(1, one).size() == 1);
}

TEST_CASE("spacing frequencies at one million trials") {
  const std::size_t n = 20, trials = 1'000'000;
  RngStream rng(32);
  std::size_t first = 0, last = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto s = sample_spacings(n, rng);
    const auto m = std::min_element(s.begin(), s.end()) - s.begin();
    first += m == 0;
    last += m == static_cast<long>(n - 1);
  }
  CHECK(std::abs(first / double(trials) - 2.0 / 21) <= 0.002);
  CHECK(std::abs(last / double(trials) - 1.0 / 210) <= 0.001);
}
