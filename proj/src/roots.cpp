#include "kpbbm/roots.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <exception>
#include <limits>
#include <memory>
#include <sstream>

#include "kpbbm/error.hpp"
#include "gsl_support.hpp"

namespace kpbbm {

namespace {

// Endpoint values are already known when the solver starts; reuse them.
struct Callback {
  const std::function<double(double)>* f;
  double lo, f_lo, hi, f_hi;
  double last_x = std::nan("");
  double last_f = std::nan("");
  std::exception_ptr failure;
};

double trampoline(double x, void* raw) {
  auto* cb = static_cast<Callback*>(raw);
  if (x == cb->lo) return cb->f_lo;
  if (x == cb->hi) return cb->f_hi;
  if (cb->failure) return std::nan("");
  try {
    cb->last_x = x;
    cb->last_f = (*cb->f)(x);
    return cb->last_f;
  } catch (...) {
    cb->failure = std::current_exception();
    return std::nan("");
  }
}

}  // namespace

RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opts) {
  detail::silence_gsl();
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, {lo, lo}, 0, {}};
  if (f_hi == 0.0) return {hi, 0.0, {hi, hi}, 0, {}};
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream os;
    os << "root not bracketed: f(" << lo << ")=" << f_lo << ", f(" << hi << ")=" << f_hi;
    fail(ErrorCode::NoSignChange, os.str());
  }

  std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> solver(
      gsl_root_fsolver_alloc(gsl_root_fsolver_brent), gsl_root_fsolver_free);
  Callback cb{&f, lo, f_lo, hi, f_hi, std::nan(""), std::nan(""), nullptr};
  gsl_function fn{&trampoline, &cb};
  gsl_root_fsolver_set(solver.get(), &fn, std::min(lo, hi), std::max(lo, hi));

  RootResult out;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const int status = gsl_root_fsolver_iterate(solver.get());
    if (cb.failure) std::rethrow_exception(cb.failure);
    if (status != GSL_SUCCESS) {
      fail(ErrorCode::ConvergenceFailure, std::string("brent iteration failed: ") + gsl_strerror(status));
    }
    const double root = gsl_root_fsolver_root(solver.get());
    out.bracket = {gsl_root_fsolver_x_lower(solver.get()), gsl_root_fsolver_x_upper(solver.get())};
    out.trace.push_back(out.bracket);
    out.iterations = iter;
    out.root = root;
    out.residual = root == cb.last_x ? cb.last_f : trampoline(root, &cb);
    if (cb.failure) std::rethrow_exception(cb.failure);

    const double floor = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(out.bracket.lo), std::abs(out.bracket.hi));
    const bool narrow = out.bracket.width() <= opts.x_tol;
    if ((narrow && std::abs(out.residual) <= opts.f_tol) || out.residual == 0.0 ||
        out.bracket.width() <= floor) {
      return out;
    }
  }
  std::ostringstream os;
  os << "brent did not converge in " << opts.max_iterations << " iterations; bracket ["
     << out.bracket.lo << ", " << out.bracket.hi << "]";
  fail(ErrorCode::ConvergenceFailure, os.str());
}

}  // namespace kpbbm
