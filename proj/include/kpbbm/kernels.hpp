#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "kpbbm/quadrature.hpp"

namespace kpbbm {

// WeakTemporal (1/tau) e^{-t/tau} is representable but has no slow-system
// reduction in this library.
enum class KernelKind { WeakTemporal, StrongTemporal, SpatioTemporalWeak };

std::string_view to_string(KernelKind kind);

struct DelayKernel {
  KernelKind kind = KernelKind::StrongTemporal;
  double tau = 1.0;
};

/// Strong temporal kernel (4t/tau^2) e^{-2t/tau}.
double eval_strong(double tau, double t);
/// Weak temporal kernel (1/tau) e^{-t/tau}.
double eval_weak(double tau, double t);
/// Heat kernel in x times the weak temporal kernel in t.
double eval_spatiotemporal(double tau, double x, double t);

/// Upper limit used for every improper temporal integral. The neglected
/// strong-kernel mass is (1 + 100) e^{-100} < 1e-41.
inline double temporal_cutoff(double tau) { return 50.0 * tau; }

/// Spatial half-width at time t. The heat kernel has standard deviation
/// sqrt(2t), so the cut sits beyond 28 standard deviations.
inline double spatial_cutoff(double tau, double t) { return 40.0 * std::sqrt(t + tau); }

/// int_0^inf t^order f(t) dt for the strong kernel (order 0: mass, 1: mean).
QuadratureResult strong_kernel_moment(double tau, int order, double tol = 1e-13);

/// int_0^inf int_R f(x,t) dx dt by nested adaptive quadrature on the
/// truncated domain.
QuadratureResult spatiotemporal_mass(double tau, double tol = 1e-11);

/// Same integral on a fixed rectangle [-x_half, x_half] x (0, t_max].
QuadratureResult spatiotemporal_mass_on(double tau, double x_half, double t_max,
                                        double tol = 1e-11);

/// (f * u)(s) = int_0^inf f(t) u(s - t) dt with the strong kernel.
double strong_convolution(double tau, const std::function<double(double)>& profile, double s,
                          double tol = 1e-12);

/// Default sample window for delta_limit_check: s in [-5, 5], step 0.1.
std::vector<double> default_sample_grid();

/// For each tau, sup over the sample grid of |(f * u)(s) - u(s)|.
/// taus must be positive and strictly decreasing.
std::vector<double> delta_limit_check(std::span<const double> taus,
                                      const std::function<double(double)>& profile,
                                      std::span<const double> sample_grid,
                                      double tol = 1e-12);

std::vector<double> delta_limit_check(std::span<const double> taus,
                                      const std::function<double(double)>& profile);

}  // namespace kpbbm
