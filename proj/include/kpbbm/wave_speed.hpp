#pragma once

#include <optional>
#include <vector>

#include "kpbbm/melnikov.hpp"
#include "kpbbm/roots.hpp"

namespace kpbbm {

struct SpeedSolution {
  double c_star = 0.0;
  double delta_prime = 0.0;  // central difference of Delta at c_star
  double residual = 0.0;     // Delta(c_star)
  Interval bracket;
  int iterations = 0;
  MelnikovVariant variant = MelnikovVariant::local();
  std::vector<Interval> trace;
};

inline constexpr double kTransversalityThreshold = 1e-8;

/// Delta(c) for fixed coefficients; thin wrapper over melnikov().
double melnikov_at(const MelnikovVariant& variant, const Coefficients& coeffs, double c,
                   double tol = kDefaultMelnikovTol);

/// A subinterval of `search` on which Delta changes sign. The search is
/// sampled on 16 panels; without a sign change its upper end is pushed
/// geometrically away from k+1 (up to 12 doublings).
Interval bracket_root(const MelnikovVariant& variant, const Coefficients& coeffs, Interval search,
                      double tol = kDefaultMelnikovTol);

/// Brent refinement of the bracket until |Delta| < tol and the bracket is
/// narrower than tol, followed by the transversality check |Delta'| >= 1e-8.
SpeedSolution find_wave_speed(const MelnikovVariant& variant, const Coefficients& coeffs,
                              double tol = 1e-12, std::optional<Interval> search = std::nullopt);

/// Number of sign changes of Delta over lo, lo+step, ..., <= hi.
int uniqueness_scan(const MelnikovVariant& variant, const Coefficients& coeffs, double lo,
                    double hi, double step, double tol = kDefaultMelnikovTol);

/// Default search interval (k+1+0.1, k+3].
Interval default_speed_search(const Coefficients& coeffs);

}  // namespace kpbbm
