#include "kpbbm/melnikov.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kpbbm/error.hpp"

namespace kpbbm {

namespace {

constexpr double kRadicandSlack = 1e-14;

void require_regime(const ModelParams& p) {
  if (!theorem_regime(p)) {
    std::ostringstream os;
    os << "Melnikov integrals need 0<=k+1<c, a<0, b>0 (a=" << p.a << ", b=" << p.b
       << ", k=" << p.k << ", c=" << p.c << ")";
    fail(ErrorCode::Regime, os.str());
  }
}

// Bracketed prefactor times s = sqrt_factor, with the leading +-2/(bc).
// The nonlocal integrands carry psi through phi on the upper branch, psi = s.
double integrand_from(const MelnikovVariant& v, double phi, double s, const ModelParams& p) {
  const double lead = 2.0 / (p.b * p.c);
  const double delay_term = 2.0 * p.a * p.c * phi;
  const double viscous_term = v.viscous() ? 1.0 : 0.0;
  switch (v.delay()) {
    case DelayKind::None:
      return lead * s;
    case DelayKind::Local:
      return lead * (delay_term + viscous_term) * s;
    case DelayKind::Nonlocal:
      return -lead * (-delay_term + 2.0 * p.a * s - viscous_term) * s;
  }
  return 0.0;
}

}  // namespace

MelnikovVariant::MelnikovVariant(DelayKind delay, bool viscous) : delay_(delay), viscous_(viscous) {
  if (delay == DelayKind::None && !viscous) {
    fail(ErrorCode::UnsupportedReduction,
         "the unperturbed problem (no delay, no viscous term) has no Melnikov function");
  }
}

MelnikovVariant MelnikovVariant::parse(const std::string& text) {
  std::string head = text;
  bool viscous = true;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    if (tail != "noviscous") fail(ErrorCode::InvalidConfig, "unknown variant modifier '" + tail + "'");
    viscous = false;
  }
  if (head == "local") return {DelayKind::Local, viscous};
  if (head == "nonlocal") return {DelayKind::Nonlocal, viscous};
  if (head == "none") return {DelayKind::None, viscous};
  fail(ErrorCode::InvalidConfig, "unknown variant '" + text + "'");
}

std::string MelnikovVariant::name() const {
  std::string out = delay_ == DelayKind::None    ? "none"
                    : delay_ == DelayKind::Local ? "local"
                                                 : "nonlocal";
  if (!viscous_) out += ":noviscous";
  return out;
}

MelnikovVariant variant_for_kernel(KernelKind kind, bool viscous) {
  switch (kind) {
    case KernelKind::StrongTemporal: return {DelayKind::Local, viscous};
    case KernelKind::SpatioTemporalWeak: return {DelayKind::Nonlocal, viscous};
    case KernelKind::WeakTemporal: break;
  }
  fail(ErrorCode::UnsupportedReduction, "no slow-system reduction for the weak temporal kernel");
}

double sqrt_factor(double phi, const ModelParams& p) {
  require_regime(p);
  const double radicand =
      (2.0 * p.a * phi * phi * phi - 3.0 * (p.k + 1.0 - p.c) * phi * phi) / (3.0 * p.b * p.c);
  if (radicand < -kRadicandSlack) {
    std::ostringstream os;
    os << "sqrt_factor: phi=" << phi << " lies outside the homoclinic range [0, " << phi_star(p)
       << "]";
    fail(ErrorCode::Domain, os.str());
  }
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

double melnikov_integrand(const MelnikovVariant& variant, double phi, const ModelParams& params) {
  return integrand_from(variant, phi, sqrt_factor(phi, params), params);
}

QuadratureResult melnikov(const MelnikovVariant& variant, const ModelParams& p, double tol,
                          std::size_t max_evaluations) {
  require_regime(p);
  if (!(tol > 0.0)) fail(ErrorCode::Domain, "melnikov tolerance must be positive");

  // phi = phi* sin^2(theta). The radicand factors as phi^2 * 2a(phi - phi*)/(3bc),
  // so s = phi* sin^2 cos * sqrt(-2a phi*/(3bc)) with no cancellation near phi*,
  // and the Jacobian phi* sin(2 theta) cancels the square-root endpoint zero.
  const double amp = phi_star(p);
  const double root_scale = std::sqrt(-2.0 * p.a * amp / (3.0 * p.b * p.c));
  auto f = [&](double theta) {
    const double sn = std::sin(theta);
    const double cs = std::cos(theta);
    const double phi = amp * sn * sn;
    const double s = phi * std::abs(cs) * root_scale;
    return integrand_from(variant, phi, s, p) * amp * 2.0 * sn * cs;
  };
  try {
    return integrate(f, 0.0, 0.5 * std::numbers::pi,
                     {.abs_tol = tol, .max_evaluations = max_evaluations});
  } catch (const Error& e) {
    std::ostringstream os;
    os << "Melnikov integral " << variant.name() << " at c=" << p.c << ": " << e.what();
    fail(e.code(), os.str());
  }
}

bool has_reference_polynomial(const Coefficients& q) {
  return q.a == -1.0 && q.b == 1.0 && q.k == -1.0;
}

double reference_polynomial(const MelnikovVariant& variant, const Coefficients& coeffs, double c) {
  if (!has_reference_polynomial(coeffs)) {
    fail(ErrorCode::UnsupportedParameters,
         "reference polynomials exist only for (a,b,k) = (-1,1,-1)");
  }
  const double delay = -72.0 / 35.0 * c * c * c;
  const double viscous = 6.0 / 5.0 * c;
  const double nonlocal_extra = 9.0 / 8.0 * c * c;
  switch (variant.delay()) {
    case DelayKind::None:
      return viscous;
    case DelayKind::Local:
      return delay + (variant.viscous() ? viscous : 0.0);
    case DelayKind::Nonlocal:
      return delay + nonlocal_extra + (variant.viscous() ? viscous : 0.0);
  }
  return 0.0;
}

double nonlocal_delay_only_closed_form(double b, double k) {
  const double speed = k + 2.0;
  if (!(b > 0.0) || !(speed > 0.0)) {
    fail(ErrorCode::Domain, "closed form needs b > 0 and k + 2 > 0");
  }
  const double sqrt3 = std::sqrt(3.0);
  return -4.0 / std::sqrt(3.0 * b * b * b * speed * speed * speed) *
         (speed * 18.0 * sqrt3 / 35.0 - 27.0 / (32.0 * std::sqrt(3.0 * b * speed)));
}

std::vector<int> sign_profile(const MelnikovVariant& variant, const Coefficients& coeffs,
                              std::span<const double> c_grid, double tol) {
  std::vector<int> signs;
  signs.reserve(c_grid.size());
  for (double c : c_grid) {
    const double value = melnikov(variant, ModelParams::from(coeffs, c), tol).value;
    signs.push_back(value > 0.0 ? 1 : (value < 0.0 ? -1 : 0));
  }
  return signs;
}

}  // namespace kpbbm
