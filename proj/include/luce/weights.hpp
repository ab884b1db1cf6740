#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace luce {

/// Strictly positive, finite weights theta_1..theta_n for labels 1..n.
/// Immutable after construction.
class WeightVector {
public:
  explicit WeightVector(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  /// Weight of card `label` (1-based).
  double theta(int label) const { return weights_[static_cast<std::size_t>(label - 1)]; }
  std::span<const double> values() const noexcept { return weights_; }
  /// Cached sum, computed once with compensated summation.
  double total() const noexcept { return total_; }
  /// True when |total - 1| <= tol.
  bool is_normalized(double tol = 1e-9) const noexcept;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
  std::vector<double> weights_;
  double total_;
};

/// A bijection of {1..n} in one-line notation: position j (0-based) holds
/// the label drawn (j+1)-th, so entry 0 is the top card.
class Permutation {
public:
  explicit Permutation(std::vector<int> labels);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t position) const { return labels_[position]; }
  std::span<const int> labels() const noexcept { return labels_; }
  Permutation reversed() const;
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

private:
  std::vector<int> labels_;
};

enum class Orientation { descending, ascending };

/// Sukhatme weights: descending gives theta_i = n-i+1, ascending theta_i = i.
WeightVector sukhatme_weights(std::size_t n, Orientation orientation);
WeightVector uniform_weights(std::size_t n);
/// theta_i = i^{-exponent}.
WeightVector zipf_weights(std::size_t n, double exponent = 1.0);

WeightVector normalize(const WeightVector& w);

/// Weights of the listed labels, in the listed order.
WeightVector restrict(const WeightVector& w, std::span<const int> subset);

} // namespace luce
