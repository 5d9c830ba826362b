#include "kpbbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpbbm/error.hpp"

namespace kpbbm {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorCode::Domain, "kernel tau must be positive");
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::WeakTemporal: return "weak-temporal";
    case KernelKind::StrongTemporal: return "strong-temporal";
    case KernelKind::SpatioTemporalWeak: return "spatiotemporal-weak";
  }
  return "unknown";
}

double eval_strong(double tau, double t) {
  require_tau(tau);
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "strong kernel is defined for t >= 0");
  if (std::isinf(t)) return 0.0;
  return 4.0 * t / (tau * tau) * std::exp(-2.0 * t / tau);
}

double eval_weak(double tau, double t) {
  require_tau(tau);
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "weak kernel is defined for t >= 0");
  return std::exp(-t / tau) / tau;
}

double eval_spatiotemporal(double tau, double x, double t) {
  require_tau(tau);
  if (!(t > 0.0)) fail(ErrorCode::Domain, "spatio-temporal kernel is defined for t > 0");
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t) *
         std::exp(-t / tau) / tau;
}

QuadratureResult strong_kernel_moment(double tau, int order, double tol) {
  require_tau(tau);
  if (order < 0) fail(ErrorCode::Domain, "moment order must be non-negative");
  auto f = [&](double t) { return std::pow(t, order) * eval_strong(tau, t); };
  return integrate(f, 0.0, temporal_cutoff(tau), {.abs_tol = tol});
}

QuadratureResult spatiotemporal_mass_on(double tau, double x_half, double t_max, double tol) {
  require_tau(tau);
  std::size_t inner_evaluations = 0;
  // The integrand is even in x, so integrate [0, x_half] and double.
  auto over_x = [&](double t) {
    if (t <= 0.0) return 0.0;
    auto f = [&](double x) { return eval_spatiotemporal(tau, x, t); };
    const QuadratureResult r = integrate(f, 0.0, x_half, {.abs_tol = 0.1 * tol, .rel_tol = 1e-14});
    inner_evaluations += r.evaluations;
    return 2.0 * r.value;
  };
  QuadratureResult outer = integrate(over_x, 0.0, t_max, {.abs_tol = tol});
  outer.evaluations += inner_evaluations;
  return outer;
}

QuadratureResult spatiotemporal_mass(double tau, double tol) {
  require_tau(tau);
  std::size_t inner_evaluations = 0;
  auto over_x = [&](double t) {
    if (t <= 0.0) return 0.0;
    auto f = [&](double x) { return eval_spatiotemporal(tau, x, t); };
    const QuadratureResult r =
        integrate(f, 0.0, spatial_cutoff(tau, t), {.abs_tol = 0.1 * tol, .rel_tol = 1e-14});
    inner_evaluations += r.evaluations;
    return 2.0 * r.value;
  };
  QuadratureResult outer = integrate(over_x, 0.0, temporal_cutoff(tau), {.abs_tol = tol});
  outer.evaluations += inner_evaluations;
  return outer;
}

double strong_convolution(double tau, const std::function<double(double)>& profile, double s,
                          double tol) {
  require_tau(tau);
  auto f = [&](double t) { return eval_strong(tau, t) * profile(s - t); };
  return integrate(f, 0.0, temporal_cutoff(tau), {.abs_tol = tol, .rel_tol = 1e-14}).value;
}

std::vector<double> default_sample_grid() {
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(0.1 * i);
  return grid;
}

std::vector<double> delta_limit_check(std::span<const double> taus,
                                      const std::function<double(double)>& profile,
                                      std::span<const double> sample_grid, double tol) {
  if (taus.empty()) fail(ErrorCode::Domain, "delta_limit_check needs at least one tau");
  if (sample_grid.empty()) fail(ErrorCode::Domain, "delta_limit_check needs a sample grid");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    require_tau(taus[i]);
    if (i > 0 && !(taus[i] < taus[i - 1])) {
      fail(ErrorCode::Domain, "tau sequence must be strictly decreasing");
    }
  }

  std::vector<double> sup_errors;
  sup_errors.reserve(taus.size());
  for (double tau : taus) {
    double worst = 0.0;
    for (double s : sample_grid) {
      worst = std::max(worst, std::abs(strong_convolution(tau, profile, s, tol) - profile(s)));
    }
    sup_errors.push_back(worst);
  }
  return sup_errors;
}

std::vector<double> delta_limit_check(std::span<const double> taus,
                                      const std::function<double(double)>& profile) {
  const std::vector<double> grid = default_sample_grid();
  return delta_limit_check(taus, profile, grid);
}

}  // namespace kpbbm
