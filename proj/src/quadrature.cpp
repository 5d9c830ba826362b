#include "kpbbm/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <algorithm>
#include <exception>
#include <limits>
#include <memory>
#include <sstream>

#include "kpbbm/error.hpp"
#include "gsl_support.hpp"

namespace kpbbm {

namespace {

constexpr std::size_t kPointsPerPanel = 15;

struct Callback {
  const std::function<double(double)>* f;
  std::size_t evaluations = 0;
  std::exception_ptr failure;
};

double trampoline(double x, void* raw) {
  auto* cb = static_cast<Callback*>(raw);
  ++cb->evaluations;
  if (cb->failure) return std::nan("");
  try {
    return (*cb->f)(x);
  } catch (...) {
    cb->failure = std::current_exception();
    return std::nan("");
  }
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts) {
  detail::silence_gsl();
  if (lo == hi) return {0.0, 0.0, 1};

  // qag spends 15 points on the first panel and 30 per bisection after that.
  const std::size_t panels =
      opts.max_evaluations > kPointsPerPanel
          ? 1 + (opts.max_evaluations - kPointsPerPanel) / (2 * kPointsPerPanel)
          : 1;
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> work(
      gsl_integration_workspace_alloc(panels), gsl_integration_workspace_free);
  if (!work) fail(ErrorCode::ConvergenceFailure, "cannot allocate quadrature workspace");

  Callback cb{&f, 0, nullptr};
  gsl_function fn{&trampoline, &cb};
  QuadratureResult out;
  const int status = gsl_integration_qag(&fn, lo, hi, opts.abs_tol, opts.rel_tol, panels,
                                         GSL_INTEG_GAUSS15, work.get(), &out.value,
                                         &out.abs_error_estimate);
  out.evaluations = cb.evaluations;
  if (cb.failure) std::rethrow_exception(cb.failure);
  // A round-off stop with the estimate already at double-precision level is
  // the best attainable answer for tolerances near machine epsilon.
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(out.value));
  const bool at_floor = status == GSL_EROUND && out.abs_error_estimate <= std::max(opts.abs_tol, floor);
  if ((status != GSL_SUCCESS && !at_floor) || !std::isfinite(out.value)) {
    std::ostringstream os;
    os << "quadrature on [" << lo << ", " << hi << "] did not converge (" << gsl_strerror(status)
       << ", error estimate " << out.abs_error_estimate << " after " << out.evaluations
       << " evaluations)";
    fail(ErrorCode::ConvergenceFailure, os.str());
  }
  return out;
}

}  // namespace kpbbm
