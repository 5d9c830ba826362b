#include "kpbbm/wave_speed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpbbm/error.hpp"

namespace kpbbm {

namespace {

constexpr int kSearchPanels = 16;
constexpr int kMaxExpansions = 12;

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void require_above_threshold(const Coefficients& q, double lo) {
  if (!(lo > q.k + 1.0)) {
    std::ostringstream os;
    os << "speed search must lie inside (k+1, inf) = (" << q.k + 1.0 << ", inf)";
    fail(ErrorCode::Domain, os.str());
  }
}

}  // namespace

double melnikov_at(const MelnikovVariant& variant, const Coefficients& coeffs, double c,
                   double tol) {
  return melnikov(variant, ModelParams::from(coeffs, c), tol).value;
}

Interval default_speed_search(const Coefficients& coeffs) {
  return {coeffs.k + 1.1, coeffs.k + 3.0};
}

Interval bracket_root(const MelnikovVariant& variant, const Coefficients& coeffs, Interval search,
                      double tol) {
  if (search.lo > search.hi) std::swap(search.lo, search.hi);
  require_above_threshold(coeffs, search.lo);
  const double base = coeffs.k + 1.0;

  double lo = search.lo;
  double hi = search.hi;
  double f_prev = melnikov_at(variant, coeffs, lo, tol);
  if (f_prev == 0.0) return {lo, lo};
  for (int expansion = 0; expansion <= kMaxExpansions; ++expansion) {
    const double step = (hi - lo) / kSearchPanels;
    double x_prev = lo;
    for (int i = 1; i <= kSearchPanels; ++i) {
      const double x = i == kSearchPanels ? hi : lo + i * step;
      const double fx = melnikov_at(variant, coeffs, x, tol);
      if (sign_of(fx) != sign_of(f_prev)) return {x_prev, x};
      x_prev = x;
      f_prev = fx;
    }
    lo = hi;
    hi = base + 2.0 * (hi - base);
  }
  std::ostringstream os;
  os << "Delta(c) for variant " << variant.name() << " keeps one sign on [" << search.lo << ", "
     << lo << "]";
  fail(ErrorCode::NoSignChange, os.str());
}

SpeedSolution find_wave_speed(const MelnikovVariant& variant, const Coefficients& coeffs,
                              double tol, std::optional<Interval> search) {
  if (!(tol > 0.0)) fail(ErrorCode::Domain, "speed tolerance must be positive");
  const Interval bracket = bracket_root(variant, coeffs, search.value_or(default_speed_search(coeffs)));

  // Quadrature error has to sit well below the root tolerance.
  const double quad_tol = std::max(1e-14, 0.01 * tol);
  auto delta = [&](double c) { return melnikov_at(variant, coeffs, c, quad_tol); };
  const RootResult root = brent_root(delta, bracket.lo, bracket.hi, {.x_tol = tol, .f_tol = tol});

  SpeedSolution out;
  out.variant = variant;
  out.c_star = root.root;
  out.residual = root.residual;
  out.bracket = root.bracket;
  out.iterations = root.iterations;
  out.trace = root.trace;

  const double h = std::max(1e-6, 1e-6 * out.c_star);
  out.delta_prime = (delta(out.c_star + h) - delta(out.c_star - h)) / (2.0 * h);
  if (!(std::abs(out.delta_prime) >= kTransversalityThreshold)) {
    std::ostringstream os;
    os << "Delta'(c*) = " << out.delta_prime << " at c* = " << out.c_star
       << " is below the transversality threshold " << kTransversalityThreshold;
    fail(ErrorCode::TransversalityFailure, os.str());
  }
  return out;
}

int uniqueness_scan(const MelnikovVariant& variant, const Coefficients& coeffs, double lo,
                    double hi, double step, double tol) {
  require_above_threshold(coeffs, lo);
  if (!(step > 0.0) || hi < lo) fail(ErrorCode::Domain, "uniqueness_scan needs lo <= hi, step > 0");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  int changes = 0;
  int prev = 0;
  for (long i = 0; i <= n; ++i) {
    const int s = sign_of(melnikov_at(variant, coeffs, lo + i * step, tol));
    if (s != 0 && prev != 0 && s != prev) ++changes;
    if (s != 0) prev = s;
  }
  return changes;
}

}  // namespace kpbbm
