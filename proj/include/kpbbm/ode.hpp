#pragma once

#include <Eigen/Dense>

#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>
#include <boost/numeric/odeint/util/odeint_error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "kpbbm/error.hpp"

namespace kpbbm {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

/// The hyperplane {y : normal . y = offset}.
template <int N>
struct Hyperplane {
  Vec<N> normal;
  double offset = 0.0;
  double eval(const Vec<N>& y) const { return normal.dot(y) - offset; }
};

// Measured against the independent variable, not the integration order.
enum class CrossingDirection { Any, Increasing, Decreasing };

template <int N>
struct EventSpec {
  Hyperplane<N> plane;
  CrossingDirection direction = CrossingDirection::Any;
  std::function<bool(const Vec<N>&)> guard;  // optional extra predicate on the crossing state
  bool terminal = true;
};

template <int N>
struct EventHit {
  double t = 0.0;
  Vec<N> state;
  std::size_t index = 0;  // which EventSpec fired
};

template <int N>
struct Trajectory {
  std::vector<double> times;  // accepted step endpoints, in integration order
  std::vector<Vec<N>> states;
  std::vector<double> sample_times;
  std::vector<Vec<N>> samples;  // dense output at the requested sample times
  std::optional<EventHit<N>> event;
  std::size_t rhs_evaluations = 0;
  std::size_t accepted_steps = 0;
};

struct IntegratorOptions {
  double tol = 1e-12;  // relative local error bound, and absolute unless abs_tol is set
  std::optional<double> abs_tol = std::nullopt;
  double initial_step = 0.0;  // 0 selects a step from the initial slope
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
  double event_time_tol = 1e-12;
};

namespace detail {

template <int N>
using OdeState = std::array<double, N>;

template <int N>
Vec<N> to_vec(const OdeState<N>& x) {
  return Eigen::Map<const Vec<N>>(x.data());
}

template <int N>
OdeState<N> to_state(const Vec<N>& v) {
  OdeState<N> x;
  Eigen::Map<Vec<N>>(x.data()) = v;
  return x;
}

[[noreturn]] inline void step_failure(double t, const char* what) {
  std::ostringstream os;
  os << what << " at t=" << t << " (stiff system; use the fast-time form for small tau)";
  fail(ErrorCode::StepUnderflow, os.str());
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y) from t0 to t1
/// (t1 < t0 integrates backward), stepped by Boost.Odeint's dense-output
/// stepper. Samples are dense-output values at the requested times; events are
/// hyperplane crossings located by bisection on the dense output, after which
/// the crossing state is recomputed with a single exact step from the last
/// accepted state. A terminal event ends the trajectory at the crossing.
/// Throws StepUnderflow when the step collapses, the state stops being finite
/// or the step budget is spent.
template <int N, class Rhs>
Trajectory<N> integrate(Rhs&& rhs, const Vec<N>& y0, double t0, double t1,
                        const IntegratorOptions& opts = {},
                        std::span<const double> sample_times = {},
                        std::span<const EventSpec<N>> events = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = detail::OdeState<N>;
  using Stepper = odeint::runge_kutta_dopri5<State>;

  if (!(opts.tol > 0.0) || !(opts.abs_tol.value_or(opts.tol) > 0.0)) {
    fail(ErrorCode::Domain, "integrator tolerances must be positive");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1)) fail(ErrorCode::Domain, "integration span must be finite");

  Trajectory<N> traj;
  traj.times.push_back(t0);
  traj.states.push_back(y0);
  if (t0 == t1) return traj;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  auto system = [&](const State& x, State& dxdt, double t) {
    ++traj.rhs_evaluations;
    Eigen::Map<Vec<N>>(dxdt.data()) = Vec<N>(rhs(t, detail::to_vec<N>(x)));
  };

  std::vector<double> pending(sample_times.begin(), sample_times.end());
  std::sort(pending.begin(), pending.end(), [dir](double x, double y) { return dir * x < dir * y; });
  std::size_t next_sample = 0;
  while (next_sample < pending.size() && dir * (pending[next_sample] - t0) < 0.0) ++next_sample;

  double h = opts.initial_step;
  if (!(h > 0.0)) {
    State k1;
    system(detail::to_state<N>(y0), k1, t0);
    const Vec<N> d = detail::to_vec<N>(k1);
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sk = opts.abs_tol.value_or(opts.tol) + opts.tol * std::abs(y0[i]);
      d0 += (y0[i] / sk) * (y0[i] / sk);
      d1 += (d[i] / sk) * (d[i] / sk);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  h = std::min({h, opts.max_step, std::abs(t1 - t0)});

  // max_dt = 0 disables the step cap in odeint.
  const double max_dt = std::isfinite(opts.max_step) ? opts.max_step : 0.0;
  const double abs_tol = opts.abs_tol.value_or(opts.tol);
  auto dense = odeint::make_dense_output(abs_tol, opts.tol, max_dt, Stepper());
  dense.initialize(detail::to_state<N>(y0), t0, dir * h);

  std::vector<double> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].plane.eval(y0);

  const double eps = std::numeric_limits<double>::epsilon();
  double t = t0;
  Vec<N> y = y0;
  State buffer;
  auto dense_at = [&](double s) {
    dense.calc_state(s, buffer);
    return detail::to_vec<N>(buffer);
  };

  while (dir * (t1 - t) > 4.0 * eps * std::max(1.0, std::abs(t1))) {
    if (traj.accepted_steps >= opts.max_steps) {
      std::ostringstream os;
      os << "step budget of " << opts.max_steps << " exhausted";
      detail::step_failure(t, os.str().c_str());
    }
    bool last = false;
    if (dir * (t + dense.current_time_step() - t1) >= 0.0) {
      const State current = dense.current_state();
      dense.initialize(current, t, t1 - t);
      last = true;
    }

    std::pair<double, double> span;
    try {
      span = dense.do_step(system);
    } catch (const odeint::odeint_error&) {
      detail::step_failure(t, "step size adjustment failed");
    }
    const double t_new = last && dense.current_time() == span.second &&
                                 std::abs(span.second - t1) <= 16.0 * eps * std::max(1.0, std::abs(t1))
                             ? t1
                             : span.second;
    const Vec<N> y_new = detail::to_vec<N>(dense.current_state());
    if (!y_new.allFinite()) detail::step_failure(t, "non-finite state");
    if (std::abs(span.second - span.first) < 16.0 * eps * std::max(1.0, std::abs(t))) {
      detail::step_failure(t, "step size underflow");
    }
    ++traj.accepted_steps;
    const double step = span.second - span.first;

    // Earliest event inside this step.
    std::optional<EventHit<N>> hit;
    std::vector<double> g_new(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      const EventSpec<N>& ev = events[i];
      g_new[i] = ev.plane.eval(y_new);
      const double ga = g_prev[i], gb = g_new[i];
      const bool crosses = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
      if (!crosses) continue;
      const bool rising_in_t = dir * (gb - ga) > 0.0;
      if (ev.direction == CrossingDirection::Increasing && !rising_in_t) continue;
      if (ev.direction == CrossingDirection::Decreasing && rising_in_t) continue;

      double lo = 0.0, hi = 1.0;  // step fractions
      while ((hi - lo) * std::abs(step) > opts.event_time_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = ev.plane.eval(dense_at(span.first + mid * step));
        if ((gm < 0.0) == (ga < 0.0) && gm != 0.0) lo = mid; else hi = mid;
      }
      const double t_hit = hi >= 1.0 ? t_new : span.first + hi * step;
      if (hit && dir * (t_hit - hit->t) >= 0.0) continue;
      Vec<N> y_hit = y_new;
      if (hi < 1.0) {
        State exact;
        Stepper().do_step(system, detail::to_state<N>(y), t, exact, t_hit - t);
        y_hit = detail::to_vec<N>(exact);
      }
      if (ev.guard && !ev.guard(y_hit)) continue;
      hit = EventHit<N>{t_hit, y_hit, i};
    }

    const double t_end = hit && events[hit->index].terminal ? hit->t : t_new;
    while (next_sample < pending.size() && dir * (pending[next_sample] - t_end) <= 0.0) {
      const double s = pending[next_sample];
      traj.sample_times.push_back(s);
      traj.samples.push_back(s == t_new ? y_new : dense_at(s));
      ++next_sample;
    }

    if (hit) {
      traj.event = hit;
      if (events[hit->index].terminal) {
        traj.times.push_back(hit->t);
        traj.states.push_back(hit->state);
        return traj;
      }
    }

    t = t_new;
    y = y_new;
    g_prev = std::move(g_new);
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  return traj;
}

}  // namespace kpbbm
