#include "kpbbm/model.hpp"

#include <cmath>
#include <sstream>

#include "kpbbm/error.hpp"

namespace kpbbm {

namespace {

std::string describe(const ModelParams& p) {
  std::ostringstream os;
  os << "(a=" << p.a << ", b=" << p.b << ", k=" << p.k << ", c=" << p.c << ")";
  return os.str();
}

// det of [[0,1],[(c-k-1+2a phi)/(bc), 0]].
double jacobian_det(double phi, const ModelParams& p) {
  return -(p.linear_gap() + 2.0 * p.a * phi) / (p.b * p.c);
}

}  // namespace

void ModelParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(k) ||
      !std::isfinite(c) || !std::isfinite(tau)) {
    fail(ErrorCode::Domain, "non-finite model parameter " + describe(*this));
  }
  if (!(c > 0.0)) fail(ErrorCode::Domain, "wave speed must be positive " + describe(*this));
  if (!(tau >= 0.0)) fail(ErrorCode::Domain, "tau must be non-negative");
}

std::string_view to_string(EquilibriumKind kind) {
  return kind == EquilibriumKind::Saddle ? "saddle" : "center";
}

bool theorem_regime(const ModelParams& p) {
  return 0.0 <= p.k + 1.0 && p.k + 1.0 < p.c && p.a < 0.0 && p.b > 0.0;
}

std::array<Equilibrium, 2> equilibria(const ModelParams& p) {
  if (p.a == 0.0) {
    fail(ErrorCode::DegenerateParameters, "degenerate: a=0, equilibria merge into a line");
  }
  if (p.linear_gap() == 0.0) {
    fail(ErrorCode::DegenerateParameters, "degenerate: c=k+1");
  }
  if (p.b == 0.0 || p.c == 0.0) {
    fail(ErrorCode::DegenerateParameters, "degenerate: b*c=0");
  }

  std::array<Equilibrium, 2> out;
  const double phis[2] = {0.0, (p.k + 1.0 - p.c) / p.a};
  for (int i = 0; i < 2; ++i) {
    Equilibrium& e = out[i];
    e.point = {phis[i], 0.0};
    e.jacobian_det = jacobian_det(phis[i], p);
    e.jacobian_trace = 0.0;
    // det != 0 here because c != k+1
    e.kind = e.jacobian_det < 0.0 ? EquilibriumKind::Saddle : EquilibriumKind::Center;
  }
  return out;
}

HamiltonianLevel hamiltonian(const PhasePoint& pt, const ModelParams& p) {
  const double bc = p.b * p.c;
  const double phi2 = pt.phi * pt.phi;
  return {(3.0 * pt.psi * pt.psi + 3.0 * phi2 * (p.k + 1.0 - p.c) / bc -
           2.0 * p.a * phi2 * pt.phi / bc) /
          6.0};
}

double phi_star(const ModelParams& p) {
  if (p.a == 0.0) fail(ErrorCode::Domain, "phi_star: division by zero, a=0");
  return 3.0 * (p.k + 1.0 - p.c) / (2.0 * p.a);
}

HomoclinicOrbit::HomoclinicOrbit(const ModelParams& params) : params_(params) {
  if (!theorem_regime(params)) {
    fail(ErrorCode::Regime, "no homoclinic orbit outside 0<=k+1<c, a<0, b>0 " + describe(params));
  }
  amplitude_ = phi_star(params);
  rate_ = 0.5 * std::sqrt(params.linear_gap() / (params.b * params.c));

  const double scale = params.b * params.c * std::abs(amplitude_) * rate_ * rate_ +
                       std::abs(params.linear_gap() * amplitude_) +
                       std::abs(params.a) * amplitude_ * amplitude_;
  for (int i = -20; i <= 20; ++i) {
    const double xi = 0.25 * i / rate_;
    if (std::abs(residual(xi)) > 1e-12 * scale) {
      fail(ErrorCode::Domain, "closed-form homoclinic profile fails the ODE residual check");
    }
  }
}

PhasePoint HomoclinicOrbit::at(double xi) const {
  const double s = 1.0 / std::cosh(rate_ * xi);
  const double phi = amplitude_ * s * s;
  return {phi, -2.0 * rate_ * phi * std::tanh(rate_ * xi)};
}

double HomoclinicOrbit::residual(double xi) const {
  const double phi = at(xi).phi;
  const double q2 = rate_ * rate_;
  const double phi_xx = 4.0 * q2 * phi - 6.0 * q2 * phi * phi / amplitude_;
  return params_.b * params_.c * phi_xx - params_.linear_gap() * phi - params_.a * phi * phi;
}

PhasePoint homoclinic_profile(const ModelParams& params, double xi) {
  return HomoclinicOrbit(params).at(xi);
}

double level_set_identity(const PhasePoint& pt, const ModelParams& p) {
  return 3.0 * pt.psi * pt.psi +
         pt.phi * pt.phi / (p.b * p.c) * (3.0 * (p.k + 1.0 - p.c) - 2.0 * p.a * pt.phi);
}

}  // namespace kpbbm
