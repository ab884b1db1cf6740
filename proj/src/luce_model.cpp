#include "luce/luce_model.hpp"

#include <algorithm>
#include <numeric>

#include "luce/error.hpp"

namespace luce {

namespace {

void check_same_size(const WeightVector& w, const Permutation& sigma) {
  if (w.size() != sigma.size())
    throw InvalidArgument("permutation has " + std::to_string(sigma.size()) +
                          " entries but weight vector has " + std::to_string(w.size()));
}

/// Binary indexed tree over nonnegative weights with weighted descent.
class FenwickTree {
public:
  explicit FenwickTree(std::span<const double> values) : tree_(values.size() + 1, 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) tree_[i + 1] = values[i];
    for (std::size_t i = 1; i < tree_.size(); ++i) {
      const std::size_t parent = i + (i & (~i + 1));
      if (parent < tree_.size()) tree_[parent] += tree_[i];
    }
    std::size_t top = 1;
    while (top * 2 < tree_.size()) top *= 2;
    top_ = top;
  }

  void add(std::size_t index, double delta) {
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  /// Smallest index whose inclusive prefix sum exceeds target; clamps to the
  /// last live slot when rounding pushes target past the total.
  std::size_t find(double target, std::span<const double> live) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    if (pos >= live.size() || live[pos] <= 0.0) {
      // Walk back to the nearest slot still carrying weight.
      std::size_t i = std::min(pos, live.size() - 1);
      while (i > 0 && live[i] <= 0.0) --i;
      if (live[i] <= 0.0)
        while (i + 1 < live.size() && live[i] <= 0.0) ++i;
      return i;
    }
    return pos;
  }

private:
  std::vector<double> tree_;
  std::size_t top_ = 1;
};

Permutation sample_urn_linear(const WeightVector& w, RngStream& rng) {
  const auto n = w.size();
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  std::vector<double> weights(w.values().begin(), w.values().end());
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t remaining = n; remaining > 0; --remaining) {
    double total = 0.0;
    for (std::size_t i = 0; i < remaining; ++i) total += weights[i];
    const double target = rng.uniform() * total;
    std::size_t pick = remaining - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < remaining; ++i) {
      acc += weights[i];
      if (target < acc) {
        pick = i;
        break;
      }
    }
    order.push_back(labels[pick]);
    // Keep remaining labels in ascending order so the scan is deterministic.
    labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(pick));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return Permutation(std::move(order));
}

Permutation sample_urn_tree(const WeightVector& w, RngStream& rng) {
  const auto n = w.size();
  std::vector<double> live(w.values().begin(), w.values().end());
  FenwickTree tree(live);
  double total = w.total();
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t drawn = 0; drawn < n; ++drawn) {
    const std::size_t pick = tree.find(rng.uniform() * total, live);
    order.push_back(static_cast<int>(pick) + 1);
    tree.add(pick, -live[pick]);
    total -= live[pick];
    live[pick] = 0.0;
    if (total <= 0.0) {
      total = 0.0;
      for (double v : live) total += v;
    }
  }
  return Permutation(std::move(order));
}

} // namespace

double luce_pmf(const WeightVector& w, const Permutation& sigma) {
  check_same_size(w, sigma);
  const auto n = sigma.size();
  // Remaining mass before draw j is the suffix sum of the not-yet-drawn
  // weights; summing from the bottom avoids subtracting from the total.
  double remaining = 0.0;
  double p = 1.0;
  for (std::size_t j = n; j-- > 0;) {
    const double theta = w.theta(sigma[j]);
    remaining += theta;
    p *= theta / remaining;
  }
  return p;
}

Permutation sample_urn(const WeightVector& w, RngStream& rng) {
  return w.size() <= kUrnLinearLimit ? sample_urn_linear(w, rng) : sample_urn_tree(w, rng);
}

Permutation sample_exponential(const WeightVector& w, RngStream& rng) {
  const auto n = w.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.exponential() / w.values()[i];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a - 1] < x[b - 1]; });
  return Permutation(std::move(order));
}

std::vector<Permutation> bruhat_covers(const Permutation& upper) {
  std::vector<Permutation> out;
  std::vector<int> labels(upper.labels().begin(), upper.labels().end());
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    if (labels[i] < labels[i + 1]) {
      std::swap(labels[i], labels[i + 1]);
      out.emplace_back(labels);
      std::swap(labels[i], labels[i + 1]);
    }
  }
  return out;
}

std::vector<double> sample_spacings(std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidArgument("sample_spacings needs n >= 1");
  std::vector<double> y(n);
  for (double& v : y) v = rng.exponential();
  std::sort(y.begin(), y.end());
  std::vector<double> out(n);
  out[0] = y[0];
  for (std::size_t j = 1; j < n; ++j) out[j] = y[j] - y[j - 1];
  return out;
}

double second_position_marginal(const WeightVector& w, int label) {
  if (label < 1 || static_cast<std::size_t>(label) > w.size())
    throw InvalidArgument("label " + std::to_string(label) + " out of range");
  if (w.size() == 1) return 0.0;
  const double total = w.total();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (static_cast<int>(i) + 1 == label) continue;
    const double theta = w.values()[i];
    acc += theta / (total * (total - theta));
  }
  return w.theta(label) * acc;
}

} // namespace luce
