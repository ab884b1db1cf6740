#include "luce/weights.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "luce/error.hpp"

namespace luce {

namespace {

double neumaier_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

} // namespace

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidArgument("weight vector must be nonempty");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double v = weights_[i];
    if (!std::isfinite(v) || !(v > 0.0)) {
      std::ostringstream os;
      os << "weight " << (i + 1) << " must be positive and finite, got " << v;
      throw InvalidArgument(os.str());
    }
  }
  total_ = neumaier_sum(weights_);
}

bool WeightVector::is_normalized(double tol) const noexcept {
  return std::abs(total_ - 1.0) <= tol;
}

Permutation::Permutation(std::vector<int> labels) : labels_(std::move(labels)) {
  const auto n = labels_.size();
  if (n == 0) throw InvalidArgument("permutation must be nonempty");
  std::vector<bool> seen(n, false);
  for (int v : labels_) {
    if (v < 1 || static_cast<std::size_t>(v) > n)
      throw InvalidArgument("permutation entry " + std::to_string(v) + " out of range 1.." +
                            std::to_string(n));
    if (seen[v - 1]) throw InvalidArgument("permutation repeats label " + std::to_string(v));
    seen[v - 1] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 1);
  return Permutation(std::move(v));
}

Permutation Permutation::reversed() const {
  return Permutation(std::vector<int>(labels_.rbegin(), labels_.rend()));
}

std::string Permutation::to_string() const {
  std::string s;
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (j) s += ',';
    s += std::to_string(labels_[j]);
  }
  return s;
}

WeightVector sukhatme_weights(std::size_t n, Orientation orientation) {
  if (n == 0) throw InvalidArgument("sukhatme weights need n >= 1");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = orientation == Orientation::descending ? static_cast<double>(n - i)
                                                  : static_cast<double>(i + 1);
  return WeightVector(std::move(v));
}

WeightVector uniform_weights(std::size_t n) {
  if (n == 0) throw InvalidArgument("uniform weights need n >= 1");
  return WeightVector(std::vector<double>(n, 1.0));
}

WeightVector zipf_weights(std::size_t n, double exponent) {
  if (n == 0) throw InvalidArgument("zipf weights need n >= 1");
  if (!std::isfinite(exponent)) throw InvalidArgument("zipf exponent must be finite");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(static_cast<double>(i + 1), -exponent);
  return WeightVector(std::move(v));
}

WeightVector normalize(const WeightVector& w) {
  std::vector<double> v(w.values().begin(), w.values().end());
  const double total = w.total();
  for (double& x : v) x /= total;
  return WeightVector(std::move(v));
}

WeightVector restrict(const WeightVector& w, std::span<const int> subset) {
  if (subset.empty()) throw InvalidArgument("restrict: subset must be nonempty");
  std::vector<bool> seen(w.size(), false);
  std::vector<double> out;
  out.reserve(subset.size());
  for (int label : subset) {
    if (label < 1 || static_cast<std::size_t>(label) > w.size())
      throw InvalidArgument("restrict: label " + std::to_string(label) + " out of range");
    if (seen[label - 1]) throw InvalidArgument("restrict: repeated label " + std::to_string(label));
    seen[label - 1] = true;
    out.push_back(w.theta(label));
  }
  return WeightVector(std::move(out));
}

} // namespace luce
