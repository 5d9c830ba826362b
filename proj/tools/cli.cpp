#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "kpbbm/dynamics.hpp"
#include "kpbbm/error.hpp"
#include "kpbbm/kernels.hpp"
#include "kpbbm/wave_speed.hpp"

namespace kpbbm::cli {

namespace {

using nlohmann::json;

// Rows are computed by a small worker pool and returned in grid order.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& task) {
  std::vector<T> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = task(i);
  };
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    double x = lo + static_cast<double>(i) * step;
    if (std::abs(x) < 1e-9 * step) x = 0.0;
    out.push_back(x);
  }
  return out;
}

OutputFormat format_or(const RunConfig& config, OutputFormat fallback) {
  return config.format.value_or(fallback);
}

json params_json(const ModelParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"k", p.k}, {"c", p.c}, {"tau", p.tau}};
}

void write_row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << fmt(v);
    first = false;
  }
  out << '\n';
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  fail(ErrorCode::InvalidConfig, "unknown format '" + text + "' (expected csv or json)");
}

}  // namespace

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void RunConfig::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      fail(ErrorCode::InvalidConfig, std::string(name) + " must be positive");
    }
  };
  positive(c_step, "c_step");
  positive(xi_step, "xi_step");
  positive(tol, "tol");
  positive(speed_tol, "speed_tol");
  positive(ode_tol, "ode_tol");
  if (xi_max < xi_min) fail(ErrorCode::InvalidConfig, "xi grid is empty (xi_max < xi_min)");
  if (c_min && c_max && *c_max < *c_min) fail(ErrorCode::InvalidConfig, "c grid is empty (c_max < c_min)");
  if (taus.empty()) fail(ErrorCode::InvalidConfig, "tau ladder is empty");
  for (double t : taus) positive(t, "every tau in the ladder");
  (void)melnikov_variant();
}

void apply_json(RunConfig& config, const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::InvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "a") config.params.a = value.get<double>();
      else if (key == "b") config.params.b = value.get<double>();
      else if (key == "k") config.params.k = value.get<double>();
      else if (key == "c") config.params.c = value.get<double>();
      else if (key == "tau") config.params.tau = value.get<double>();
      else if (key == "variant") config.variant = value.get<std::string>();
      else if (key == "format") config.format = parse_format(value.get<std::string>());
      else if (key == "out") config.out_path = value.get<std::string>();
      else if (key == "orbits") config.orbits_path = value.get<std::string>();
      else if (key == "c_min") config.c_min = value.get<double>();
      else if (key == "c_max") config.c_max = value.get<double>();
      else if (key == "c_step") config.c_step = value.get<double>();
      else if (key == "xi_min") config.xi_min = value.get<double>();
      else if (key == "xi_max") config.xi_max = value.get<double>();
      else if (key == "xi_step") config.xi_step = value.get<double>();
      else if (key == "taus") config.taus = value.get<std::vector<double>>();
      else if (key == "tol") config.tol = value.get<double>();
      else if (key == "speed_tol") config.speed_tol = value.get<double>();
      else if (key == "ode_tol") config.ode_tol = value.get<double>();
      else fail(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  json doc = {{"a", c.params.a},       {"b", c.params.b},         {"k", c.params.k},
              {"c", c.params.c},       {"tau", c.params.tau},     {"variant", c.variant},
              {"out", c.out_path},     {"orbits", c.orbits_path}, {"c_step", c.c_step},
              {"xi_min", c.xi_min},    {"xi_max", c.xi_max},      {"xi_step", c.xi_step},
              {"taus", c.taus},        {"tol", c.tol},            {"speed_tol", c.speed_tol},
              {"ode_tol", c.ode_tol}};
  if (c.format) doc["format"] = *c.format == OutputFormat::Csv ? "csv" : "json";
  if (c.c_min) doc["c_min"] = *c.c_min;
  if (c.c_max) doc["c_max"] = *c.c_max;
  return doc;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateParameters:
    case ErrorCode::Domain:
    case ErrorCode::Regime:
    case ErrorCode::UnsupportedReduction:
    case ErrorCode::UnsupportedParameters:
    case ErrorCode::InvalidConfig:
      return kExitInvalid;
    case ErrorCode::NoSignChange:
    case ErrorCode::TransversalityFailure:
      return kExitNegative;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::StepUnderflow:
    case ErrorCode::NoCrossing:
    case ErrorCode::EigenFailure:
      return kExitNumerical;
  }
  return kExitNumerical;
}

// ---------------------------------------------------------------------------

int cmd_equilibria(const RunConfig& config, std::ostream& out) {
  const auto eqs = equilibria(config.params);
  const bool regime = theorem_regime(config.params);
  if (format_or(config, OutputFormat::Json) == OutputFormat::Json) {
    json doc;
    doc["params"] = params_json(config.params);
    doc["theorem_regime"] = regime;
    doc["equilibria"] = json::array();
    for (const Equilibrium& e : eqs) {
      doc["equilibria"].push_back({{"phi", e.point.phi},
                                   {"psi", e.point.psi},
                                   {"kind", std::string(to_string(e.kind))},
                                   {"jacobian_det", e.jacobian_det},
                                   {"jacobian_trace", e.jacobian_trace}});
    }
    out << doc.dump(2) << '\n';
  } else {
    out << "phi,psi,kind,jacobian_det,jacobian_trace,theorem_regime\n";
    for (const Equilibrium& e : eqs) {
      out << fmt(e.point.phi) << ',' << fmt(e.point.psi) << ',' << to_string(e.kind) << ','
          << fmt(e.jacobian_det) << ',' << fmt(e.jacobian_trace) << ','
          << (regime ? "true" : "false") << '\n';
    }
  }
  return kExitOk;
}

namespace {

struct SampleOrbit {
  int id = 0;
  double level = 0.0;
  std::vector<double> xi;
  std::vector<PhasePoint> points;
};

// Level-set orbits inside the loop (periodic around the center) and outside
// it (escaping), integrated until they close or leave a box around the loop.
std::vector<SampleOrbit> sample_orbits(const ModelParams& p, double ode_tol) {
  const HomoclinicOrbit loop(p);
  const double amp = loop.amplitude();
  const double center = (p.k + 1.0 - p.c) / p.a;
  const double span = 60.0 / loop.rate();

  std::vector<SampleOrbit> orbits;
  int id = 0;
  for (double f : {0.25, 0.5, 0.75}) {
    const PhasePoint start{center + f * (amp - center), 0.0};
    EventSpec<2> closes;
    closes.plane = {Vec<2>(0.0, 1.0), 0.0};
    closes.direction = CrossingDirection::Decreasing;
    closes.guard = [center](const Vec<2>& y) { return y[0] > center; };
    const std::array<EventSpec<2>, 1> events = {closes};
    const auto traj = integrate_planar(p, start, 0.0, span, {.tol = ode_tol}, {}, events);
    SampleOrbit o{id++, hamiltonian(start, p).value, {}, {}};
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      o.xi.push_back(traj.times[i]);
      o.points.push_back({traj.states[i][0], traj.states[i][1]});
    }
    orbits.push_back(std::move(o));
  }

  const double box = 2.0 * std::abs(amp);
  std::array<EventSpec<2>, 4> walls;
  walls[0].plane = {Vec<2>(1.0, 0.0), box};
  walls[1].plane = {Vec<2>(1.0, 0.0), -box};
  walls[2].plane = {Vec<2>(0.0, 1.0), box};
  walls[3].plane = {Vec<2>(0.0, 1.0), -box};
  for (double f : {1.1, -0.2}) {
    const PhasePoint start{f * amp, 0.0};
    SampleOrbit o{id++, hamiltonian(start, p).value, {}, {}};
    const auto back = integrate_planar(p, start, 0.0, -span, {.tol = ode_tol}, {}, walls);
    const auto fwd = integrate_planar(p, start, 0.0, span, {.tol = ode_tol}, {}, walls);
    for (std::size_t i = back.times.size(); i-- > 1;) {
      o.xi.push_back(back.times[i]);
      o.points.push_back({back.states[i][0], back.states[i][1]});
    }
    for (std::size_t i = 0; i < fwd.times.size(); ++i) {
      o.xi.push_back(fwd.times[i]);
      o.points.push_back({fwd.states[i][0], fwd.states[i][1]});
    }
    orbits.push_back(std::move(o));
  }
  return orbits;
}

}  // namespace

int cmd_portrait(const RunConfig& config, std::ostream& out) {
  const HomoclinicOrbit loop(config.params);
  const std::vector<double> xis = grid(config.xi_min, config.xi_max, config.xi_step);
  const bool as_json = format_or(config, OutputFormat::Csv) == OutputFormat::Json;
  const bool want_orbits = as_json || !config.orbits_path.empty();
  const std::vector<SampleOrbit> orbits =
      want_orbits ? sample_orbits(config.params, config.ode_tol) : std::vector<SampleOrbit>{};

  if (as_json) {
    json doc;
    doc["params"] = params_json(config.params);
    doc["phi_star"] = loop.amplitude();
    doc["homoclinic"] = json::array();
    for (double xi : xis) {
      const PhasePoint p = loop.at(xi);
      doc["homoclinic"].push_back({{"xi", xi}, {"phi", p.phi}, {"psi", p.psi}});
    }
    doc["orbits"] = json::array();
    for (const SampleOrbit& o : orbits) {
      json pts = json::array();
      for (std::size_t i = 0; i < o.xi.size(); ++i) {
        pts.push_back({{"xi", o.xi[i]}, {"phi", o.points[i].phi}, {"psi", o.points[i].psi}});
      }
      doc["orbits"].push_back({{"orbit", o.id}, {"level", o.level}, {"points", pts}});
    }
    out << doc.dump(2) << '\n';
  } else {
    out << "xi,phi,psi\n";
    for (double xi : xis) {
      const PhasePoint p = loop.at(xi);
      write_row(out, {xi, p.phi, p.psi});
    }
  }

  if (!config.orbits_path.empty()) {
    std::ofstream side(config.orbits_path, std::ios::binary);
    if (!side) fail(ErrorCode::InvalidConfig, "cannot open " + config.orbits_path);
    side << "orbit,level,xi,phi,psi\n";
    for (const SampleOrbit& o : orbits) {
      for (std::size_t i = 0; i < o.xi.size(); ++i) {
        side << o.id << ',';
        write_row(side, {o.level, o.xi[i], o.points[i].phi, o.points[i].psi});
      }
    }
  }
  return kExitOk;
}

int cmd_melnikov(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const MelnikovVariant variant = config.melnikov_variant();
  const Coefficients coeffs = config.params.coefficients();
  const double lo = config.c_min.value_or(coeffs.k + 1.0 + config.c_step);
  const double hi = config.c_max.value_or(3.0);
  if (!(lo > coeffs.k + 1.0)) fail(ErrorCode::Domain, "speed grid must lie inside (k+1, inf)");
  const std::vector<double> cs = grid(lo, hi, config.c_step);
  const bool reference = has_reference_polynomial(coeffs);

  struct Row {
    QuadratureResult result;
    std::string failure;
  };
  const std::vector<Row> rows = parallel_map<Row>(cs.size(), [&](std::size_t i) {
    Row row;
    try {
      row.result = melnikov(variant, ModelParams::from(coeffs, cs[i]), config.tol);
    } catch (const Error& e) {
      row.result.value = std::nan("");
      row.failure = e.what();
    }
    return row;
  });

  int status = kExitOk;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].failure.empty()) {
      err << "row c=" << fmt(cs[i]) << ": " << rows[i].failure << '\n';
      status = kExitNumerical;
    }
  }

  if (format_or(config, OutputFormat::Csv) == OutputFormat::Json) {
    json doc;
    doc["variant"] = variant.name();
    doc["params"] = params_json(config.params);
    doc["rows"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json row = {{"c", cs[i]}, {"delta", rows[i].result.value},
                  {"abs_error", rows[i].result.abs_error_estimate}};
      if (reference) row["reference"] = reference_polynomial(variant, coeffs, cs[i]);
      if (!rows[i].failure.empty()) row["failure"] = rows[i].failure;
      doc["rows"].push_back(row);
    }
    out << doc.dump(2) << '\n';
  } else {
    out << (reference ? "c,delta,reference\n" : "c,delta\n");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (reference) {
        write_row(out, {cs[i], rows[i].result.value, reference_polynomial(variant, coeffs, cs[i])});
      } else {
        write_row(out, {cs[i], rows[i].result.value});
      }
    }
  }
  return status;
}

int cmd_speed(const RunConfig& config, std::ostream& out) {
  const MelnikovVariant variant = config.melnikov_variant();
  const Coefficients coeffs = config.params.coefficients();
  Interval search = default_speed_search(coeffs);
  if (config.c_min) search.lo = *config.c_min;
  if (config.c_max) search.hi = *config.c_max;
  const SpeedSolution s = find_wave_speed(variant, coeffs, config.speed_tol, search);

  if (format_or(config, OutputFormat::Json) == OutputFormat::Csv) {
    out << "variant,c_star,delta_prime,residual,bracket_lo,bracket_hi,iterations\n";
    out << variant.name() << ',' << fmt(s.c_star) << ',' << fmt(s.delta_prime) << ','
        << fmt(s.residual) << ',' << fmt(s.bracket.lo) << ',' << fmt(s.bracket.hi) << ','
        << s.iterations << '\n';
    return kExitOk;
  }
  json trace = json::array();
  for (const Interval& b : s.trace) trace.push_back({b.lo, b.hi});
  json doc = {{"variant", variant.name()},
              {"params", params_json(config.params)},
              {"c_star", s.c_star},
              {"delta_prime", s.delta_prime},
              {"residual", s.residual},
              {"bracket", {{"lo", s.bracket.lo}, {"hi", s.bracket.hi}}},
              {"iterations", s.iterations},
              {"trace", trace}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_persist(const RunConfig& config, std::ostream& out) {
  const MelnikovVariant variant = config.melnikov_variant();
  const Coefficients coeffs = config.params.coefficients();
  const SplittingOptions opts{.integrator_tol = config.ode_tol};
  const std::vector<PersistentSpeed> rows = parallel_map<PersistentSpeed>(
      config.taus.size(),
      [&](std::size_t i) { return persistent_speed_numeric(variant, coeffs, config.taus[i], opts); });

  if (format_or(config, OutputFormat::Csv) == OutputFormat::Json) {
    json doc = {{"variant", variant.name()}, {"params", params_json(config.params)}};
    doc["c_star"] = rows.front().c_star;
    doc["rows"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      doc["rows"].push_back({{"tau", config.taus[i]},
                             {"c_hat", rows[i].c_hat},
                             {"error", rows[i].c_hat - rows[i].c_star}});
    }
    out << doc.dump(2) << '\n';
  } else {
    out << "tau,c_hat,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      write_row(out, {config.taus[i], rows[i].c_hat, rows[i].c_hat - rows[i].c_star});
    }
  }
  return kExitOk;
}

int cmd_kernel_check(const RunConfig& config, std::ostream& out) {
  if (format_or(config, OutputFormat::Json) != OutputFormat::Json) {
    fail(ErrorCode::InvalidConfig, "kernel-check only writes JSON");
  }
  const std::vector<double> kernel_taus = {0.1, 0.5, 1.0, 2.0};
  json doc;
  doc["strong"] = json::array();
  doc["spatiotemporal"] = json::array();
  for (double tau : kernel_taus) {
    const double mass = strong_kernel_moment(tau, 0).value;
    const double mean = strong_kernel_moment(tau, 1).value;
    doc["strong"].push_back({{"tau", tau},
                             {"mass", mass},
                             {"mass_error", std::abs(mass - 1.0)},
                             {"mean", mean},
                             {"mean_error", std::abs(mean - tau)}});
    const double st_mass = spatiotemporal_mass(tau).value;
    doc["spatiotemporal"].push_back(
        {{"tau", tau}, {"mass", st_mass}, {"mass_error", std::abs(st_mass - 1.0)}});
  }

  const std::vector<double> ladder = {0.1, 0.05, 0.025};
  auto constant = [](double) { return 1.0; };
  auto linear = [](double t) { return t; };
  auto sech2 = [](double t) {
    const double s = 1.0 / std::cosh(t);
    return s * s;
  };
  doc["delta_limit"] = {{"taus", ladder},
                        {"constant", delta_limit_check(ladder, constant)},
                        {"linear", delta_limit_check(ladder, linear)},
                        {"sech2", delta_limit_check(ladder, sech2)}};
  (void)config;
  out << doc.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traveling-wave analysis of the delayed KP-BBM equation"};
  app.require_subcommand(1);

  struct Flags {
    double a, b, k, c, tau, c_step, xi_min, xi_max, xi_step, tol, speed_tol, ode_tol, c_min, c_max;
    std::string variant, format, out, orbits, config;
    std::vector<double> taus;
  } flags{};
  const RunConfig defaults;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bound;
  auto add_common = [&](CLI::App* sub) {
    auto opt = [&](const char* name, double& slot, double def, const char* help,
                   std::function<void(RunConfig&)> apply) {
      slot = def;
      bound.emplace_back(sub->add_option(name, slot, help)->default_val(def), std::move(apply));
    };
    // no single default: it depends on the subcommand and on k
    auto opt_free = [&](const char* name, double& slot, const char* help,
                        std::function<void(RunConfig&)> apply) {
      bound.emplace_back(sub->add_option(name, slot, help), std::move(apply));
    };
    opt("--a", flags.a, defaults.params.a, "quadratic nonlinearity a", [&](RunConfig& r) { r.params.a = flags.a; });
    opt("--b", flags.b, defaults.params.b, "dispersion b", [&](RunConfig& r) { r.params.b = flags.b; });
    opt("--k", flags.k, defaults.params.k, "transverse coefficient k", [&](RunConfig& r) { r.params.k = flags.k; });
    opt("--c", flags.c, defaults.params.c, "wave speed c", [&](RunConfig& r) { r.params.c = flags.c; });
    opt("--tau", flags.tau, defaults.params.tau, "delay strength tau", [&](RunConfig& r) { r.params.tau = flags.tau; });
    opt_free("--c-min", flags.c_min, "lower end of the speed grid [melnikov: k+1+c-step, speed: k+1.1]",
        [&](RunConfig& r) { r.c_min = flags.c_min; });
    opt_free("--c-max", flags.c_max, "upper end of the speed grid [melnikov: 3, speed: k+3]",
        [&](RunConfig& r) { r.c_max = flags.c_max; });
    opt("--c-step", flags.c_step, defaults.c_step, "speed grid step", [&](RunConfig& r) { r.c_step = flags.c_step; });
    opt("--xi-min", flags.xi_min, defaults.xi_min, "portrait xi start", [&](RunConfig& r) { r.xi_min = flags.xi_min; });
    opt("--xi-max", flags.xi_max, defaults.xi_max, "portrait xi end", [&](RunConfig& r) { r.xi_max = flags.xi_max; });
    opt("--xi-step", flags.xi_step, defaults.xi_step, "portrait xi step", [&](RunConfig& r) { r.xi_step = flags.xi_step; });
    opt("--tol", flags.tol, defaults.tol, "Melnikov quadrature tolerance", [&](RunConfig& r) { r.tol = flags.tol; });
    opt("--speed-tol", flags.speed_tol, defaults.speed_tol, "wave-speed root tolerance",
        [&](RunConfig& r) { r.speed_tol = flags.speed_tol; });
    opt("--ode-tol", flags.ode_tol, defaults.ode_tol, "integrator local error tolerance",
        [&](RunConfig& r) { r.ode_tol = flags.ode_tol; });

    flags.variant = defaults.variant;
    bound.emplace_back(sub->add_option("--variant", flags.variant,
                                       "local | nonlocal | none, optionally with :noviscous")
                           ->default_val(defaults.variant),
                       [&](RunConfig& r) { r.variant = flags.variant; });
    bound.emplace_back(sub->add_option("--format", flags.format, "csv | json (default depends on subcommand)"),
                       [&](RunConfig& r) { r.format = parse_format(flags.format); });
    bound.emplace_back(sub->add_option("--out", flags.out, "output file (default stdout)"),
                       [&](RunConfig& r) { r.out_path = flags.out; });
    bound.emplace_back(sub->add_option("--orbits", flags.orbits, "portrait: sample-orbit CSV sidecar"),
                       [&](RunConfig& r) { r.orbits_path = flags.orbits; });
    flags.taus = defaults.taus;
    bound.emplace_back(sub->add_option("--taus", flags.taus, "persist: comma-separated tau ladder")
                           ->delimiter(',')
                           ->default_str("0.004,0.002,0.001"),
                       [&](RunConfig& r) { r.taus = flags.taus; });
    sub->add_option("--config", flags.config, "JSON config file; flags override its values");
  };

  using Command = std::function<int(const RunConfig&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const char* name, const char* help, Command cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    commands.emplace_back(sub, std::move(cmd));
  };
  add("equilibria", "equilibria, their classification and the theorem-regime verdict", cmd_equilibria);
  add("portrait", "homoclinic loop samples (xi,phi,psi) and optional level-set orbits", cmd_portrait);
  add("melnikov", "Delta(c) over a speed grid",
      [&err](const RunConfig& r, std::ostream& o) { return cmd_melnikov(r, o, err); });
  add("speed", "persistent wave speed c* and Delta'(c*)", cmd_speed);
  add("persist", "numerical persistent speed over a tau ladder", cmd_persist);
  add("kernel-check", "kernel normalization and delta-limit checks", cmd_kernel_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg, help;
    const int code = app.exit(e, help, msg);
    err << msg.str() << help.str();
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    RunConfig config;
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) fail(ErrorCode::InvalidConfig, "cannot open config " + flags.config);
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
      }
      apply_json(config, doc);
    }
    for (auto& [option, apply] : bound) {
      if (option->count() > 0) apply(config);
    }
    config.validate();

    for (auto& [sub, cmd] : commands) {
      if (!sub->parsed()) continue;
      if (config.out_path.empty()) return cmd(config, out);
      std::ofstream file(config.out_path, std::ios::binary);
      if (!file) fail(ErrorCode::InvalidConfig, "cannot open " + config.out_path);
      return cmd(config, file);
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kExitInvalid;
}

}  // namespace kpbbm::cli
