#pragma once

#include <cstddef>
#include <functional>

namespace luce::quad {

struct Result {
  double value = 0.0;
  /// Sum of the per-panel Kronrod-minus-Gauss error estimates.
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_panels = 2000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]: repeatedly bisect
/// the panel with the largest error estimate until the total estimate
/// drops below max(abs_tol, rel_tol * |value|) or the panel budget runs out.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options = {});

} // namespace luce::quad
