#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace kpbbm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return std::abs(hi - lo); }
  bool contains(double x) const { return std::min(lo, hi) <= x && x <= std::max(lo, hi); }
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;      // f(root)
  Interval bracket;           // final sign-change bracket, root inside
  int iterations = 0;
  std::vector<Interval> trace;  // bracket after every iteration
};

struct RootOptions {
  double x_tol = 1e-12;  // final bracket width
  double f_tol = 1e-12;  // |f(root)|
  int max_iterations = 200;
};

/// Brent's method (GSL brent solver). Stops once |f(root)| <= f_tol and the
/// bracket is narrower than x_tol, or when the bracket can no longer shrink in
/// double precision. Throws NoSignChange when f(lo) and f(hi) share a sign and
/// ConvergenceFailure when the iteration budget runs out.
RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opts = {});

}  // namespace kpbbm
