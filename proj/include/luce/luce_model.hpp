#pragma once

#include <cstddef>
#include <vector>

#include "luce/rng.hpp"
#include "luce/weights.hpp"

namespace luce {

/// Probability of draw order `sigma` when balls are drawn without
/// replacement with chance proportional to weight. Scale-free in `w`.
double luce_pmf(const WeightVector& w, const Permutation& sigma);

/// Sequential urn draw. Linear scan up to kUrnLinearLimit labels, a Fenwick
/// tree above.
Permutation sample_urn(const WeightVector& w, RngStream& rng);
inline constexpr std::size_t kUrnLinearLimit = 10'000;

/// Sort of independent exponentials with rates theta_i, smallest first.
/// Ties go to the smaller label.
Permutation sample_exponential(const WeightVector& w, RngStream& rng);

/// The permutations covered by `upper` in the weak Bruhat order: one for
/// each ascent upper[i] < upper[i+1], with positions i and i+1 swapped.
std::vector<Permutation> bruhat_covers(const Permutation& upper);

/// (Y(1), Y(2)-Y(1), ..., Y(n)-Y(n-1)) for n standard exponentials.
std::vector<double> sample_spacings(std::size_t n, RngStream& rng);

/// P(second card drawn is `label`) = theta_l * sum_{i != l} theta_i / (W (W - theta_i)).
double second_position_marginal(const WeightVector& w, int label);

} // namespace luce
