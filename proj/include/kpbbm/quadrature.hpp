#pragma once

#include <cstddef>
#include <functional>

namespace kpbbm {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_evaluations = 1'000'000;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature (GSL QAG). Throws
/// ConvergenceFailure when the tolerance cannot be met within the evaluation
/// budget; exceptions thrown by f are propagated unchanged.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

}  // namespace kpbbm
