#include "kpbbm/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "kpbbm/error.hpp"
#include "kpbbm/wave_speed.hpp"

namespace kpbbm {

namespace {

// psi' of the slow system: ((c-k-1)phi + a phi^2 - omega)/(bc).
double slow_force(const SlowPoint& p, const ModelParams& q) {
  return (q.linear_gap() * p.phi + q.a * p.phi * p.phi - p.omega) / (q.b * q.c);
}

double viscous_weight(const MelnikovVariant& v) { return v.viscous() ? 1.0 : 0.0; }

void require_delay(const MelnikovVariant& v) {
  if (v.delay() == DelayKind::None) {
    fail(ErrorCode::UnsupportedReduction, "the five-dimensional system needs a delay kernel");
  }
}

}  // namespace

PhasePoint planar_rhs(const PhasePoint& p, const ModelParams& q) {
  return {p.psi, (q.linear_gap() * p.phi + q.a * p.phi * p.phi) / (q.b * q.c)};
}

SlowPoint slow3_rhs(const MelnikovVariant& v, const SlowPoint& p, const ModelParams& q) {
  const double force = slow_force(p, q);
  double omega_dot = q.tau * viscous_weight(v) * force;
  switch (v.delay()) {
    case DelayKind::None:
      break;
    case DelayKind::Local:
      omega_dot += -2.0 * q.a * q.c * q.tau * p.psi * p.psi;
      break;
    case DelayKind::Nonlocal:
      omega_dot += -2.0 * q.a * q.c * q.tau * p.psi * p.psi - 2.0 * q.a * p.psi * q.tau * force;
      break;
  }
  return {p.psi, force, omega_dot};
}

Eigen::Matrix3d slow3_jacobian(const MelnikovVariant& v, const SlowPoint& p, const ModelParams& q) {
  const double bc = q.b * q.c;
  const double force = slow_force(p, q);
  const double force_phi = (q.linear_gap() + 2.0 * q.a * p.phi) / bc;
  const double force_omega = -1.0 / bc;

  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 1) = 1.0;
  j(1, 0) = force_phi;
  j(1, 2) = force_omega;
  const double w = q.tau * viscous_weight(v);
  j(2, 0) = w * force_phi;
  j(2, 2) = w * force_omega;
  if (v.delay() != DelayKind::None) j(2, 1) += -4.0 * q.a * q.c * q.tau * p.psi;
  if (v.delay() == DelayKind::Nonlocal) {
    const double s = -2.0 * q.a * q.tau;
    j(2, 0) += s * p.psi * force_phi;
    j(2, 1) += s * force;
    j(2, 2) += s * p.psi * force_omega;
  }
  return j;
}

FullPoint full5_rhs(const MelnikovVariant& v, const FullPoint& p, const ModelParams& q,
                    TimeScale scale) {
  require_delay(v);
  const double bc = q.b * q.c;
  const double visc = viscous_weight(v);
  const double omega_dot =
      (q.linear_gap() * p.psi + 2.0 * q.a * p.eta * p.psi - visc * q.tau * p.omega) / bc;

  if (v.delay() == DelayKind::Local) {
    const double eta_fast = (2.0 * p.eta - p.zeta) / q.c;
    const double zeta_fast = (2.0 * p.zeta - 4.0 * p.phi) / q.c;
    if (scale == TimeScale::Fast) {
      return {q.tau * p.psi, q.tau * p.omega, q.tau * omega_dot, eta_fast, zeta_fast};
    }
    if (!(q.tau > 0.0)) fail(ErrorCode::Domain, "slow-time form divides by tau; tau must be > 0");
    return {p.psi, p.omega, omega_dot, eta_fast / q.tau, zeta_fast / q.tau};
  }

  const double eps = std::sqrt(q.tau);
  const double eta_fast = p.zeta;
  const double zeta_fast = -q.c * eps * p.zeta + p.eta - p.phi;
  if (scale == TimeScale::Fast) {
    return {eps * p.psi, eps * p.omega, eps * omega_dot, eta_fast, zeta_fast};
  }
  if (!(q.tau > 0.0)) fail(ErrorCode::Domain, "slow-time form divides by sqrt(tau); tau must be > 0");
  return {p.psi, p.omega, omega_dot, eta_fast / eps, zeta_fast / eps};
}

Eigen::Matrix2d layer_transverse_block(const MelnikovVariant& v, const ModelParams& q) {
  require_delay(v);
  Eigen::Matrix2d m;
  if (v.delay() == DelayKind::Local) {
    m << 2.0 / q.c, -1.0 / q.c, 0.0, 2.0 / q.c;
  } else {
    m << 0.0, 1.0, 1.0, 0.0;
  }
  return m;
}

ManifoldExpansion manifold_expansion(const MelnikovVariant& v, const FullPoint& p,
                                     const ModelParams& q) {
  require_delay(v);
  if (v.delay() == DelayKind::Local) return {q.c * p.psi, q.c * p.psi};
  return {q.c * p.psi + p.omega, p.psi};
}

Eigen::Vector2d slow_manifold_offset(const MelnikovVariant& v, const FullPoint& p,
                                     const ModelParams& q) {
  const ManifoldExpansion m = manifold_expansion(v, p, q);
  if (v.delay() == DelayKind::Local) {
    return {p.eta - p.phi - q.tau * m.g_first_order, p.zeta - 2.0 * p.phi - q.tau * m.h_first_order};
  }
  return {p.eta - p.phi - q.tau * m.g_first_order, p.zeta - std::sqrt(q.tau) * m.h_first_order};
}

Trajectory<2> integrate_planar(const ModelParams& params, const PhasePoint& start, double xi0,
                               double xi1, const IntegratorOptions& opts,
                               std::span<const double> samples,
                               std::span<const EventSpec<2>> events) {
  auto rhs = [&](double, const Vec<2>& y) {
    const PhasePoint d = planar_rhs({y[0], y[1]}, params);
    return Vec<2>(d.phi, d.psi);
  };
  return integrate<2>(rhs, Vec<2>(start.phi, start.psi), xi0, xi1, opts, samples, events);
}

Trajectory<3> integrate_slow(const MelnikovVariant& variant, const ModelParams& params,
                             const SlowPoint& start, double xi0, double xi1,
                             const IntegratorOptions& opts, std::span<const double> samples,
                             std::span<const EventSpec<3>> events) {
  auto rhs = [&](double, const Vec<3>& y) {
    return slow3_rhs(variant, SlowPoint::from(y), params).vec();
  };
  return integrate<3>(rhs, start.vec(), xi0, xi1, opts, samples, events);
}

Trajectory<5> integrate_full(const MelnikovVariant& variant, const ModelParams& params,
                             const FullPoint& start, double xi0, double xi1,
                             const IntegratorOptions& opts, std::span<const double> samples) {
  require_delay(variant);
  if (!(params.tau > 0.0)) fail(ErrorCode::Domain, "five-dimensional integration needs tau > 0");

  if (params.tau >= kFastTimeThreshold) {
    auto rhs = [&](double, const Vec<5>& y) {
      return full5_rhs(variant, FullPoint::from(y), params, TimeScale::Slow).vec();
    };
    return integrate<5>(rhs, start.vec(), xi0, xi1, opts, samples);
  }

  // xi = scale * z
  const double scale = variant.delay() == DelayKind::Local ? params.tau : std::sqrt(params.tau);
  auto rhs = [&](double, const Vec<5>& y) {
    return full5_rhs(variant, FullPoint::from(y), params, TimeScale::Fast).vec();
  };
  std::vector<double> fast_samples(samples.begin(), samples.end());
  for (double& s : fast_samples) s /= scale;
  IntegratorOptions fast_opts = opts;
  fast_opts.initial_step = opts.initial_step / scale;
  fast_opts.max_step = opts.max_step / scale;
  Trajectory<5> traj =
      integrate<5>(rhs, start.vec(), xi0 / scale, xi1 / scale, fast_opts, fast_samples);
  for (double& t : traj.times) t *= scale;
  for (double& t : traj.sample_times) t *= scale;
  return traj;
}

double slow_equilibrium_phi(const ModelParams& q, double omega) {
  const double gap = q.linear_gap();
  const double disc = gap * gap + 4.0 * q.a * omega;
  if (disc < 0.0) {
    std::ostringstream os;
    os << "no equilibrium on the slow line for omega=" << omega;
    fail(ErrorCode::Domain, os.str());
  }
  // Root of a phi^2 + gap phi - omega = 0 that vanishes with omega.
  if (gap > 0.0) return 2.0 * omega / (gap + std::sqrt(disc));
  return 2.0 * omega / (gap - std::sqrt(disc));
}

SaddleFrame saddle_frame(const MelnikovVariant& variant, const ModelParams& params, double omega) {
  if (!theorem_regime(params)) fail(ErrorCode::Regime, "saddle_frame needs the theorem regime");

  SaddleFrame out;
  out.equilibrium = {slow_equilibrium_phi(params, omega), 0.0, omega};
  const Eigen::Matrix3d j = slow3_jacobian(variant, out.equilibrium, params);
  Eigen::EigenSolver<Eigen::Matrix3d> solver(j);
  if (solver.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigen-decomposition failed");

  const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
  std::array<int, 3> order = {0, 1, 2};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(solver.eigenvalues()[i].imag()) > 1e-12 * scale) {
      fail(ErrorCode::EigenFailure, "complex eigenvalues at the slow equilibrium");
    }
  }
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return solver.eigenvalues()[x].real() > solver.eigenvalues()[y].real();
  });
  const double hi = solver.eigenvalues()[order[0]].real();
  const double mid = solver.eigenvalues()[order[1]].real();
  const double lo = solver.eigenvalues()[order[2]].real();
  if (hi - mid < 1e-10 || mid - lo < 1e-10 || !(hi > 0.0) || !(lo < 0.0)) {
    fail(ErrorCode::EigenFailure, "eigenvalues at the slow equilibrium are not cleanly separated");
  }

  auto unit = [&](int idx, int sign_component) {
    Eigen::Vector3d v = solver.eigenvectors().col(idx).real();
    v.normalize();
    if (v[sign_component] < 0.0) v = -v;
    return v;
  };
  out.unstable_rate = hi;
  out.center_rate = mid;
  out.stable_rate = lo;
  out.unstable = unit(order[0], 0);
  out.center = unit(order[1], 2);
  out.stable = unit(order[2], 0);
  return out;
}

namespace {

// Follows the unstable (stable) branch of the equilibrium at omega_base forward
// (backward) to the first crossing of the section.
SlowPoint shoot_to_section(const MelnikovVariant& v, const ModelParams& q, double omega_base,
                           bool stable, const SplittingOptions& opts) {
  const SaddleFrame frame = saddle_frame(v, q, omega_base);
  const Eigen::Vector3d dir = stable ? frame.stable : frame.unstable;
  const Vec<3> start = frame.equilibrium.vec() + opts.offset * dir;

  const double amp = phi_star(q);
  const double center_phi = (q.k + 1.0 - q.c) / q.a;
  const double rate = std::min(frame.unstable_rate, -frame.stable_rate);
  const double span = (std::log(1.0 / opts.offset) + 40.0) / rate;

  std::array<EventSpec<3>, 3> events;
  events[0].plane = {Vec<3>(0.0, 1.0, 0.0), 0.0};
  events[0].guard = [center_phi](const Vec<3>& y) { return y[0] > center_phi; };
  // Escape box: far outside the loop the branch is lost.
  events[1].plane = {Vec<3>(1.0, 0.0, 0.0), 10.0 * std::abs(amp)};
  events[2].plane = {Vec<3>(1.0, 0.0, 0.0), -10.0 * std::abs(amp)};

  const Trajectory<3> traj = integrate_slow(v, q, SlowPoint::from(start), 0.0,
                                            stable ? -span : span, {.tol = opts.integrator_tol},
                                            {}, events);
  if (!traj.event || traj.event->index != 0) {
    std::ostringstream os;
    os << (stable ? "stable" : "unstable") << " branch at c=" << q.c << ", tau=" << q.tau
       << " never reached the section";
    fail(ErrorCode::NoCrossing, os.str());
  }
  return SlowPoint::from(traj.event->state);
}

// Equilibrium omega whose branch meets the section at omega = target.
std::pair<double, SlowPoint> match_branch(const MelnikovVariant& v, const ModelParams& q,
                                          bool stable, double target,
                                          const SplittingOptions& opts) {
  auto mismatch = [&](double base) {
    return shoot_to_section(v, q, base, stable, opts).omega - target;
  };
  // omega drifts by O(tau) along a branch, and d(omega_cross)/d(omega_base) ~ 1.
  const double drift = mismatch(target);
  if (drift == 0.0) return {target, shoot_to_section(v, q, target, stable, opts)};
  const double guess = target - drift;
  double half = std::max(0.25 * std::abs(drift), 1e-13);
  double lo = guess - half, hi = guess + half;
  double f_lo = mismatch(lo), f_hi = mismatch(hi);
  for (int i = 0; i < 20 && (f_lo > 0.0) == (f_hi > 0.0); ++i) {
    half *= 2.0;
    lo = guess - half;
    hi = guess + half;
    f_lo = mismatch(lo);
    f_hi = mismatch(hi);
  }
  const double x_tol = std::max(1e-15, 1e-12 * std::abs(guess));
  const RootResult r = brent_root(mismatch, lo, hi,
                                  {.x_tol = x_tol, .f_tol = std::numeric_limits<double>::infinity()});
  return {r.root, shoot_to_section(v, q, r.root, stable, opts)};
}

}  // namespace

SplittingMeasurement splitting_gap(const MelnikovVariant& variant, const ModelParams& params,
                                   const SplittingOptions& opts) {
  params.validate();
  if (!theorem_regime(params)) fail(ErrorCode::Regime, "splitting_gap needs the theorem regime");
  if (!(params.tau > 0.0) || params.tau > 0.05) {
    fail(ErrorCode::Domain, "splitting_gap needs 0 < tau <= 0.05");
  }

  SplittingMeasurement out;
  out.c = params.c;
  out.tau = params.tau;
  out.section = {0.0, (params.k + 1.0 - params.c) / params.a};

  const auto [u_base, u_cross] = match_branch(variant, params, false, out.section.omega, opts);
  const auto [s_base, s_cross] = match_branch(variant, params, true, out.section.omega, opts);
  out.unstable_base_omega = u_base;
  out.stable_base_omega = s_base;
  out.unstable_crossing = u_cross;
  out.stable_crossing = s_cross;
  out.signed_gap = hamiltonian({s_cross.phi, s_cross.psi}, params).value -
                   hamiltonian({u_cross.phi, u_cross.psi}, params).value;
  return out;
}

PersistentSpeed persistent_speed_numeric(const MelnikovVariant& variant, const Coefficients& coeffs,
                                         double tau, const SplittingOptions& opts) {
  if (!(tau > 0.0) || tau > 0.02) fail(ErrorCode::Domain, "persistent speed needs 0 < tau <= 0.02");

  PersistentSpeed out;
  out.c_star = find_wave_speed(variant, coeffs, 1e-10).c_star;

  auto gap = [&](double c) {
    return splitting_gap(variant, ModelParams::from(coeffs, c, tau), opts).signed_gap;
  };
  const double floor = coeffs.k + 1.0;
  double half = 0.05 * std::max(1.0, out.c_star - floor);
  double lo = 0.0, hi = 0.0, f_lo = 0.0, f_hi = 0.0;
  bool bracketed = false;
  for (int i = 0; i < 6 && !bracketed; ++i, half *= 2.0) {
    lo = std::max(out.c_star - half, floor + 0.25 * (out.c_star - floor));
    hi = out.c_star + half;
    f_lo = gap(lo);
    f_hi = gap(hi);
    bracketed = (f_lo > 0.0) != (f_hi > 0.0);
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "splitting gap keeps one sign on [" << lo << ", " << hi << "] at tau=" << tau;
    fail(ErrorCode::NoSignChange, os.str());
  }
  const RootResult r =
      brent_root(gap, lo, hi, {.x_tol = 1e-9, .f_tol = std::numeric_limits<double>::infinity()});
  out.c_hat = r.root;
  out.bracket = r.bracket;
  out.iterations = r.iterations;
  return out;
}

}  // namespace kpbbm
