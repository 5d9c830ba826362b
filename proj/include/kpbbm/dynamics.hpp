#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "kpbbm/melnikov.hpp"
#include "kpbbm/model.hpp"
#include "kpbbm/ode.hpp"
#include "kpbbm/roots.hpp"

namespace kpbbm {

/// State of the reduced slow system in normal-form coordinates; omega is the
/// shifted variable (c-k-1)phi + a phi^2 - bc phi''.
struct SlowPoint {
  double phi = 0.0;
  double psi = 0.0;
  double omega = 0.0;

  Vec<3> vec() const { return {phi, psi, omega}; }
  static SlowPoint from(const Vec<3>& v) { return {v[0], v[1], v[2]}; }
};

/// State of the five-dimensional slow-fast system; here omega = phi''.
struct FullPoint {
  double phi = 0.0;
  double psi = 0.0;
  double omega = 0.0;
  double eta = 0.0;
  double zeta = 0.0;

  Vec<5> vec() const {
    Vec<5> v;
    v << phi, psi, omega, eta, zeta;
    return v;
  }
  static FullPoint from(const Vec<5>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
};

enum class TimeScale { Slow, Fast };

/// First-order graph of the slow manifold over (phi, psi, omega): for the
/// local kernel eta = phi + g, zeta = 2 phi + h with g = h = c psi tau;
/// for the nonlocal kernel eta = phi + g, zeta = h with g = (c psi + omega) tau
/// and h = psi sqrt(tau).
struct ManifoldExpansion {
  double g_first_order = 0.0;  // coefficient of tau
  double h_first_order = 0.0;  // coefficient of tau (local) or sqrt(tau) (nonlocal)
};

PhasePoint planar_rhs(const PhasePoint& p, const ModelParams& params);

/// Reduced slow system with the o(tau) remainder dropped. The delay part of
/// omega' is -2ac tau psi^2 (local) or -2ac tau psi^2 - 2a psi tau psi'
/// (nonlocal); the viscous part is tau psi'.
SlowPoint slow3_rhs(const MelnikovVariant& variant, const SlowPoint& p, const ModelParams& params);

Eigen::Matrix3d slow3_jacobian(const MelnikovVariant& variant, const SlowPoint& p,
                               const ModelParams& params);

/// Five-dimensional slow-fast field in slow time xi or fast time z
/// (xi = tau z for the local kernel, xi = sqrt(tau) z for the nonlocal one).
/// The slow form divides by tau and throws Domain at tau = 0.
FullPoint full5_rhs(const MelnikovVariant& variant, const FullPoint& p, const ModelParams& params,
                    TimeScale scale = TimeScale::Slow);

/// Jacobian of the layer equations in (eta, zeta) at tau = 0.
Eigen::Matrix2d layer_transverse_block(const MelnikovVariant& variant, const ModelParams& params);

ManifoldExpansion manifold_expansion(const MelnikovVariant& variant, const FullPoint& p,
                                     const ModelParams& params);

/// (eta, zeta) minus their first-order slow-manifold values.
Eigen::Vector2d slow_manifold_offset(const MelnikovVariant& variant, const FullPoint& p,
                                     const ModelParams& params);

inline constexpr double kFastTimeThreshold = 1e-4;

Trajectory<2> integrate_planar(const ModelParams& params, const PhasePoint& start, double xi0,
                               double xi1, const IntegratorOptions& opts = {},
                               std::span<const double> samples = {},
                               std::span<const EventSpec<2>> events = {});

Trajectory<3> integrate_slow(const MelnikovVariant& variant, const ModelParams& params,
                             const SlowPoint& start, double xi0, double xi1,
                             const IntegratorOptions& opts = {},
                             std::span<const double> samples = {},
                             std::span<const EventSpec<3>> events = {});

/// Integrates the five-dimensional system; below tau = 1e-4 the fast-time
/// form is used internally. Times in the result are always slow times xi.
Trajectory<5> integrate_full(const MelnikovVariant& variant, const ModelParams& params,
                             const FullPoint& start, double xi0, double xi1,
                             const IntegratorOptions& opts = {},
                             std::span<const double> samples = {});

/// phi on the saddle branch of the line of equilibria {psi = 0,
/// (c-k-1)phi + a phi^2 = omega} that passes through the origin.
double slow_equilibrium_phi(const ModelParams& params, double omega);

struct SaddleFrame {
  SlowPoint equilibrium;
  double unstable_rate = 0.0;
  double stable_rate = 0.0;
  double center_rate = 0.0;
  Eigen::Vector3d unstable;  // unit vectors, phi component >= 0
  Eigen::Vector3d stable;
  Eigen::Vector3d center;
};

/// Eigen-decomposition of the slow-system Jacobian at the equilibrium of the
/// line with the given omega (the origin by default).
SaddleFrame saddle_frame(const MelnikovVariant& variant, const ModelParams& params,
                         double omega = 0.0);

/// Cross section {psi = 0, phi > phi_min} on which both manifolds are matched
/// at the same omega.
struct SplittingSection {
  double omega = 0.0;
  double phi_min = 0.0;
};

struct SplittingMeasurement {
  double c = 0.0;
  double tau = 0.0;
  /// H(stable crossing) - H(unstable crossing); to first order tau * Delta(c).
  double signed_gap = 0.0;
  SplittingSection section;
  SlowPoint unstable_crossing;
  SlowPoint stable_crossing;
  double unstable_base_omega = 0.0;  // equilibrium the unstable branch leaves
  double stable_base_omega = 0.0;    // equilibrium the stable branch enters
};

struct SplittingOptions {
  double integrator_tol = 1e-12;
  double offset = 1e-6;  // shooting distance along the eigenvectors
};

/// Splitting of the slow manifolds of the line of equilibria, measured as a
/// Hamiltonian gap on the section. Each branch is shot from an equilibrium of
/// the line whose omega is tuned so that the branch meets the section at
/// omega = 0.
SplittingMeasurement splitting_gap(const MelnikovVariant& variant, const ModelParams& params,
                                   const SplittingOptions& opts = {});

struct PersistentSpeed {
  double c_hat = 0.0;
  double c_star = 0.0;  // root of the Melnikov function the search started from
  Interval bracket;
  int iterations = 0;
};

/// Root in c of splitting_gap at fixed tau, bracketed outward from the
/// Melnikov root of the same variant.
PersistentSpeed persistent_speed_numeric(const MelnikovVariant& variant, const Coefficients& coeffs,
                                         double tau, const SplittingOptions& opts = {});

}  // namespace kpbbm
