#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpbbm/error.hpp"
#include "kpbbm/melnikov.hpp"
#include "kpbbm/model.hpp"

namespace kpbbm::cli {

enum class OutputFormat { Csv, Json };

/// Everything a subcommand needs. Defaults are the reference triple
/// (a, b, k) = (-1, 1, -1) at c = 1, tau = 1e-3.
struct RunConfig {
  ModelParams params{-1.0, 1.0, -1.0, 1.0, 1e-3};
  std::string variant = "local";
  std::optional<OutputFormat> format;  // unset: the subcommand's own default
  std::string out_path;                // empty: standard output
  std::string orbits_path;             // portrait only: sample orbits sidecar

  std::optional<double> c_min;  // speed grids; defaults depend on the subcommand
  std::optional<double> c_max;
  double c_step = 0.01;
  double xi_min = -30.0;
  double xi_max = 30.0;
  double xi_step = 0.1;
  std::vector<double> taus = {4e-3, 2e-3, 1e-3};

  double tol = 1e-10;         // Melnikov quadrature
  double speed_tol = 1e-12;   // root of Delta
  double ode_tol = 1e-12;     // integrator local error

  /// Throws InvalidConfig when a grid is empty or a tolerance is not positive.
  void validate() const;
  MelnikovVariant melnikov_variant() const { return MelnikovVariant::parse(variant); }
};

/// Applies the keys of a JSON config object on top of `config`. Unknown keys
/// are rejected.
void apply_json(RunConfig& config, const nlohmann::json& doc);

nlohmann::json to_json(const RunConfig& config);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNegative = 3;
inline constexpr int kExitNumerical = 4;

int exit_code_for(ErrorCode code);

/// Formats a double with 17 significant digits.
std::string fmt(double x);

int cmd_equilibria(const RunConfig& config, std::ostream& out);
int cmd_portrait(const RunConfig& config, std::ostream& out);
int cmd_melnikov(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_speed(const RunConfig& config, std::ostream& out);
int cmd_persist(const RunConfig& config, std::ostream& out);
int cmd_kernel_check(const RunConfig& config, std::ostream& out);

/// Full command-line entry point: parses argv, resolves the config, runs the
/// subcommand and maps library errors onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kpbbm::cli
