// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "kpbbm/dynamics.hpp"
#include "kpbbm/error.hpp"
#include "kpbbm/kernels.hpp"
#include "kpbbm/melnikov.hpp"
#include "kpbbm/model.hpp"
#include "kpbbm/wave_speed.hpp"

using namespace kpbbm;

namespace {

const Coefficients kRef{-1.0, 1.0, -1.0};
const std::vector<double> kOracleGrid = {0.3, 0.5, 0.7637, 1.0, 1.5, 2.0};

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  Check check;
  try {
    body(check);
  } catch (const std::exception& e) {
    check.ok = false;
    check.detail << " [exception: " << e.what() << "]";
  }
  if (!check.ok) ++failures;
  std::printf("criterion %d: %s - %s%s\n", id, check.ok ? "PASS" : "FAIL", title,
              check.detail.str().c_str());
  std::fflush(stdout);
}

double worst_against(const MelnikovVariant& v, const std::function<double(double)>& oracle) {
  double worst = 0.0;
  for (double c : kOracleGrid) {
    worst = std::max(worst, std::abs(melnikov(v, ModelParams::from(kRef, c)).value - oracle(c)));
  }
  return worst;
}

int sign_changes_in_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int changes = 0;
  int previous = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double delta = std::stod(line.substr(comma + 1));
    const int sign = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
    if (sign != 0 && previous != 0 && sign != previous) ++changes;
    if (sign != 0) previous = sign;
  }
  return changes;
}

}  // namespace

int main() {
  criterion(1, "local Melnikov quadrature matches -72/35 c^3 + 6/5 c", [](Check& k) {
    const double worst = worst_against(MelnikovVariant::local(), [](double c) {
      return -72.0 / 35.0 * c * c * c + 6.0 / 5.0 * c;
    });
    k.detail << " max abs error " << worst;
    k.require(worst < 1e-8, "abs error < 1e-8");
  });

  criterion(2, "local wave speed sqrt(7/12) with slope -12/5", [](Check& k) {
    const SpeedSolution s = find_wave_speed(MelnikovVariant::local(), kRef);
    const double root_error = std::abs(s.c_star - std::sqrt(7.0 / 12.0));
    const double slope_error = std::abs(s.delta_prime + 12.0 / 5.0);
    k.detail << " c*=" << cli::fmt(s.c_star) << " root error " << root_error << " slope error "
             << slope_error;
    k.require(root_error < 1e-10, "root within 1e-10");
    k.require(slope_error < 1e-6, "slope within 1e-6");
  });

  criterion(3, "nonlocal Melnikov quadrature and roots", [](Check& k) {
    const double worst = worst_against(MelnikovVariant::nonlocal(), [](double c) {
      return -72.0 / 35.0 * c * c * c + 9.0 / 8.0 * c * c + 6.0 / 5.0 * c;
    });
    const double qa = 72.0 / 35.0, qb = 9.0 / 8.0, qc = 6.0 / 5.0;
    const double oracle = (qb + std::sqrt(qb * qb + 4.0 * qa * qc)) / (2.0 * qa);
    const double full = find_wave_speed(MelnikovVariant::nonlocal(), kRef).c_star;
    const double delay_only = find_wave_speed({DelayKind::Nonlocal, false}, kRef).c_star;
    k.detail << " max abs error " << worst << ", full root " << cli::fmt(full) << " (oracle "
             << cli::fmt(oracle) << "), delay-only root " << cli::fmt(delay_only);
    k.require(worst < 1e-8, "quadrature within 1e-8");
    k.require(std::abs(full - oracle) < 1e-8, "full root within 1e-8 of the quadratic formula");
    k.require(std::abs(delay_only - 35.0 / 64.0) < 1e-10, "delay-only root 35/64 within 1e-10");
  });

  criterion(4, "nonlocal delay-only closed form at c = k + 2", [](Check& k) {
    const std::vector<std::pair<double, double>> cases = {{1, -1}, {1, 0}, {0.25, 0}, {0.01, 0}};
    double worst = 0.0;
    for (auto [b, kk] : cases) {
      const double closed = nonlocal_delay_only_closed_form(b, kk);
      const double quad =
          melnikov({DelayKind::Nonlocal, false}, ModelParams{-1.0, b, kk, kk + 2.0}).value;
      worst = std::max(worst, std::abs(quad - closed) / std::abs(closed));
    }
    const double small_b = nonlocal_delay_only_closed_form(0.01, 0.0);
    k.detail << " max rel error " << worst << ", value at (0.01,0) " << cli::fmt(small_b);
    k.require(worst < 1e-6, "relative error < 1e-6");
    k.require(small_b > 0.0, "positive at b = 0.01, k = 0");
  });

  criterion(5, "viscous part positive and local delay part negative", [](Check& k) {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(3.0 * i / 20.0);
    int bad = 0;
    for (int s : sign_profile(MelnikovVariant::viscous_only(), kRef, grid)) bad += s != 1;
    for (int s : sign_profile({DelayKind::Local, false}, kRef, grid)) bad += s != -1;
    k.detail << " " << bad << " wrong signs over 2x20 speeds";
    k.require(bad == 0, "every sign as expected");
  });

  criterion(6, "homoclinic orbit residual, energy and sqrt factor", [](Check& k) {
    const ModelParams p = ModelParams::from(kRef, 1.0);
    const HomoclinicOrbit orbit(p);
    double residual = 0.0;
    double sqrt_dev = 0.0;
    for (double xi = -30.0; xi <= 30.0; xi += 0.01) {
      const PhasePoint q = orbit.at(xi);
      residual = std::max(residual, std::abs(orbit.residual(xi)));
      sqrt_dev = std::max(sqrt_dev, std::abs(sqrt_factor(q.phi, p) - std::abs(q.psi)));
    }
    // energy along a numerically integrated orbit started on the loop
    const PhasePoint start = orbit.at(-30.0);
    const double h0 = hamiltonian(start, p).value;
    const auto traj = integrate_planar(p, start, -30.0, 30.0, {.tol = 1e-13});
    double drift = 0.0;
    for (const auto& y : traj.states) {
      drift = std::max(drift, std::abs(hamiltonian({y[0], y[1]}, p).value - h0));
    }
    k.detail << " residual " << residual << ", H drift " << drift << ", sqrt deviation " << sqrt_dev;
    k.require(residual < 1e-10, "residual < 1e-10");
    k.require(drift < 1e-9, "H drift < 1e-9");
    k.require(sqrt_dev < 1e-10, "sqrt factor deviation < 1e-10");
  });

  criterion(7, "persistent speed from the splitting gap", [](Check& k) {
    const double c_star = std::sqrt(7.0 / 12.0);
    std::vector<double> errors;
    for (double tau : {4e-3, 2e-3, 1e-3}) {
      const PersistentSpeed s = persistent_speed_numeric(MelnikovVariant::local(), kRef, tau);
      errors.push_back(std::abs(s.c_hat - c_star));
    }
    k.detail << " errors " << errors[0] << ", " << errors[1] << ", " << errors[2];
    k.require(errors[2] < 0.05, "|c_hat(1e-3) - c*| < 0.05");
    k.require(errors[1] < errors[0] && errors[2] < errors[1], "error decreases with tau");
    int mismatches = 0;
    for (double c : {0.5, 0.7, 0.9, 1.2}) {
      const double gap =
          splitting_gap(MelnikovVariant::local(), ModelParams::from(kRef, c, 1e-3)).signed_gap;
      const double delta = melnikov_at(MelnikovVariant::local(), kRef, c);
      mismatches += (gap > 0.0) != (delta > 0.0);
    }
    k.detail << ", sign mismatches " << mismatches;
    k.require(mismatches == 0, "gap sign equals Melnikov sign");
  });

  criterion(8, "kernel normalization and delta limit", [](Check& k) {
    double mass = 0.0, mean = 0.0, st = 0.0;
    for (double tau : {0.1, 0.5, 1.0, 2.0}) {
      mass = std::max(mass, std::abs(strong_kernel_moment(tau, 0).value - 1.0));
      mean = std::max(mean, std::abs(strong_kernel_moment(tau, 1).value - tau));
      st = std::max(st, std::abs(spatiotemporal_mass(tau).value - 1.0));
    }
    const std::vector<double> taus = {0.1, 0.05, 0.025};
    const auto sup = delta_limit_check(taus, [](double s) {
      const double u = 1.0 / std::cosh(s);
      return u * u;
    });
    k.detail << " mass " << mass << ", mean " << mean << ", spatio-temporal " << st
             << ", sech2 sup errors " << sup[0] << " > " << sup[1] << " > " << sup[2];
    k.require(mass < 1e-10, "strong mass within 1e-10");
    k.require(mean < 1e-8, "strong mean within 1e-8");
    k.require(st < 1e-7, "spatio-temporal mass within 1e-7");
    k.require(sup[1] < sup[0] && sup[2] < sup[1], "sup errors strictly decrease");
  });

  criterion(9, "melnikov grid output has one sign change over (0, 3]", [](Check& k) {
    for (const char* variant : {"local", "nonlocal"}) {
      cli::RunConfig config;
      config.variant = variant;
      std::ostringstream out, err;
      const int code = cli::cmd_melnikov(config, out, err);
      const int changes = sign_changes_in_csv(out.str());
      k.detail << " " << variant << ": " << changes;
      k.require(code == 0, std::string(variant) + " run succeeded");
      k.require(changes == 1, std::string(variant) + " exactly one sign change");
    }
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
