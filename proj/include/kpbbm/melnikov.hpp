#pragma once

#include <span>
#include <string>
#include <vector>

#include "kpbbm/kernels.hpp"
#include "kpbbm/model.hpp"
#include "kpbbm/quadrature.hpp"

namespace kpbbm {

enum class DelayKind { None, Local, Nonlocal };

/// Which perturbation an integral refers to: the delay kind and whether the
/// viscous tau*u_xx term is present. (None, inviscid) has no Melnikov
/// function and cannot be constructed.
class MelnikovVariant {
 public:
  MelnikovVariant(DelayKind delay, bool viscous);

  static MelnikovVariant local() { return {DelayKind::Local, true}; }
  static MelnikovVariant nonlocal() { return {DelayKind::Nonlocal, true}; }
  static MelnikovVariant viscous_only() { return {DelayKind::None, true}; }

  /// Parses "local", "nonlocal", "none", optionally suffixed with ":noviscous".
  static MelnikovVariant parse(const std::string& text);

  DelayKind delay() const { return delay_; }
  bool viscous() const { return viscous_; }
  std::string name() const;

  bool operator==(const MelnikovVariant&) const = default;

 private:
  DelayKind delay_;
  bool viscous_;
};

/// Maps a delay kernel onto the variant whose slow system was reduced for it.
/// The weak temporal kernel raises UnsupportedReduction.
MelnikovVariant variant_for_kernel(KernelKind kind, bool viscous);

inline constexpr double kDefaultMelnikovTol = 1e-10;
inline constexpr std::size_t kDefaultMelnikovBudget = 1'000'000;

/// sqrt((2a phi^3 - 3(k+1-c) phi^2) / (3bc)), i.e. |psi| on the homoclinic loop.
double sqrt_factor(double phi, const ModelParams& params);

/// Integrand of Delta(c) in phi, so that Delta(c) = int_0^phi* integrand dphi.
double melnikov_integrand(const MelnikovVariant& variant, double phi, const ModelParams& params);

/// Delta(c) by adaptive quadrature after the substitution phi = phi* sin^2(theta).
QuadratureResult melnikov(const MelnikovVariant& variant, const ModelParams& params,
                          double tol = kDefaultMelnikovTol,
                          std::size_t max_evaluations = kDefaultMelnikovBudget);

/// Closed-form Delta(c) for the coefficient triple (a,b,k) = (-1,1,-1) only;
/// other triples raise UnsupportedParameters.
double reference_polynomial(const MelnikovVariant& variant, const Coefficients& coeffs, double c);

/// True when reference_polynomial accepts the coefficients.
bool has_reference_polynomial(const Coefficients& coeffs);

/// Delay-only nonlocal Delta evaluated at a = -1, c = k + 2:
///   -4/sqrt(3 b^3 (k+2)^3) [ (k+2) 18 sqrt(3)/35 - 27/(32 sqrt(3b(k+2))) ].
double nonlocal_delay_only_closed_form(double b, double k);

/// Sign (-1, 0, +1) of Delta at each speed of the grid.
std::vector<int> sign_profile(const MelnikovVariant& variant, const Coefficients& coeffs,
                              std::span<const double> c_grid, double tol = kDefaultMelnikovTol);

}  // namespace kpbbm
