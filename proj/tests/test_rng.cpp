#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "luce/rng.hpp"

using luce::RngStream;

TEST_CASE("philox block function matches the published known-answer vectors") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(luce::philox4x32_10({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(luce::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(luce::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and seed sensitive") {
  RngStream a(42), b(42), c(43);
  std::vector<std::uint64_t> va, vb, vc;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
  }
  CHECK(va == vb);
  CHECK(va != vc);
}

TEST_CASE("split children are deterministic and distinct") {
  const RngStream root(7);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RngStream child = root.split(i);
    RngStream again = root.split(i);
    const auto x = child();
    CHECK(x == again());
    firsts.insert(x);
  }
  CHECK(firsts.size() == 1000);
  RngStream parent(7);
  RngStream child0 = root.split(0);
  CHECK(parent() != child0());
}

TEST_CASE("uniform lies in the open unit interval with the right mean") {
  RngStream rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("below is unbiased over a small range") {
  RngStream rng(3);
  std::vector<int> counts(7, 0);
  const int n = 700000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c / double(n) - 1.0 / 7.0) < 0.003);
}

TEST_CASE("exponential draws have unit mean") {
  RngStream rng(11);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.exponential();
  CHECK(std::abs(sum / n - 1.0) < 0.01);
}
