#pragma once

#include <array>
#include <string_view>

namespace kpbbm {

/// Coefficients of the KP-BBM operator that do not depend on the wave speed.
struct Coefficients {
  double a = -1.0;  // quadratic nonlinearity
  double b = 1.0;   // dispersion
  double k = -1.0;  // transverse term
};

struct ModelParams {
  double a = -1.0;
  double b = 1.0;
  double k = -1.0;
  double c = 1.0;    // wave speed
  double tau = 0.0;  // delay strength

  static ModelParams from(const Coefficients& coeffs, double c, double tau = 0.0) {
    return {coeffs.a, coeffs.b, coeffs.k, c, tau};
  }
  Coefficients coefficients() const { return {a, b, k}; }
  ModelParams with_speed(double speed) const {
    ModelParams p = *this;
    p.c = speed;
    return p;
  }
  ModelParams with_tau(double t) const {
    ModelParams p = *this;
    p.tau = t;
    return p;
  }

  // c - k - 1, the linear coefficient of the traveling-wave equation.
  double linear_gap() const { return c - k - 1.0; }

  /// Throws Domain unless c > 0, tau >= 0 and every field is finite.
  void validate() const;
};

struct PhasePoint {
  double phi = 0.0;
  double psi = 0.0;
};

enum class EquilibriumKind { Saddle, Center };

std::string_view to_string(EquilibriumKind kind);

struct Equilibrium {
  PhasePoint point;
  EquilibriumKind kind = EquilibriumKind::Saddle;
  double jacobian_det = 0.0;
  double jacobian_trace = 0.0;
};

struct HamiltonianLevel {
  double value = 0.0;
};

/// 0 <= k+1 < c, a < 0 and b > 0: the planar system has a homoclinic loop.
bool theorem_regime(const ModelParams& params);

/// The saddle at phi = 0 followed by the center at phi = (k+1-c)/a.
/// Throws DegenerateParameters when a = 0 or c = k+1.
std::array<Equilibrium, 2> equilibria(const ModelParams& params);

/// First integral of the planar traveling-wave system. The homoclinic level
/// is H(0,0) = 0.
HamiltonianLevel hamiltonian(const PhasePoint& p, const ModelParams& params);

/// Turning amplitude 3(k+1-c)/(2a) of the homoclinic loop.
double phi_star(const ModelParams& params);

/// Closed-form solitary profile phi(xi) = A sech^2(q xi) of the planar system,
/// with A = phi_star and q = sqrt((c-k-1)/(bc))/2.
///
/// Construction checks the ODE residual on a grid and refuses parameters
/// outside the theorem regime.
class HomoclinicOrbit {
 public:
  explicit HomoclinicOrbit(const ModelParams& params);

  PhasePoint at(double xi) const;
  /// bc*phi'' - (c-k-1)*phi - a*phi^2 evaluated on the closed form.
  double residual(double xi) const;

  double amplitude() const { return amplitude_; }
  double rate() const { return rate_; }
  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  double amplitude_;
  double rate_;
};

PhasePoint homoclinic_profile(const ModelParams& params, double xi);

/// Level-set identity 3psi^2 + phi^2/(bc) (3(k+1-c) - 2a phi) which vanishes on
/// the homoclinic loop.
double level_set_identity(const PhasePoint& p, const ModelParams& params);

}  // namespace kpbbm
