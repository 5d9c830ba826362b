#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "kpbbm/error.hpp"
#include "kpbbm/model.hpp"

using namespace kpbbm;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kpbbm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("kpbbm_test_" + name);
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0}) CHECK(std::stod(cli::fmt(x)) == x);
  CHECK(cli::fmt(-0.0) == "0");
  CHECK(cli::fmt(std::nan("")) == "nan");
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(ErrorCode::DegenerateParameters) == 2);
  CHECK(cli::exit_code_for(ErrorCode::InvalidConfig) == 2);
  CHECK(cli::exit_code_for(ErrorCode::NoSignChange) == 3);
  CHECK(cli::exit_code_for(ErrorCode::TransversalityFailure) == 3);
  CHECK(cli::exit_code_for(ErrorCode::ConvergenceFailure) == 4);
  CHECK(cli::exit_code_for(ErrorCode::NoCrossing) == 4);
}

TEST_CASE("config json round trip") {
  cli::RunConfig config;
  config.params.c = 0.9;
  config.variant = "nonlocal:noviscous";
  config.format = cli::OutputFormat::Json;
  config.c_min = 0.2;
  config.taus = {1e-3};
  cli::RunConfig back;
  cli::apply_json(back, cli::to_json(config));
  CHECK(cli::to_json(back) == cli::to_json(config));
  CHECK_THROWS_AS(cli::apply_json(back, json{{"speed", 1.0}}), Error);
  CHECK_THROWS_AS(cli::apply_json(back, json{{"c", "fast"}}), Error);
}

TEST_CASE("equilibria subcommand") {
  const Outcome r = invoke({"equilibria"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["theorem_regime"] == true);
  CHECK(doc["equilibria"][0]["kind"] == "saddle");
  CHECK(doc["equilibria"][1]["phi"].get<double>() == doctest::Approx(1.0));

  CHECK(invoke({"equilibria", "--a", "0"}).code == 2);
  const Outcome degenerate = invoke({"equilibria", "--c", "0"});
  CHECK(degenerate.code == 2);
  CHECK(degenerate.err.find("degenerate: c=k+1") != std::string::npos);
}

TEST_CASE("equilibria json matches the library") {
  const json doc = json::parse(invoke({"equilibria", "--c", "1.7", "--b", "0.5"}).out);
  const auto eqs = equilibria(ModelParams{-1.0, 0.5, -1.0, 1.7});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(doc["equilibria"][i]["phi"].get<double>() == eqs[i].point.phi);
    CHECK(doc["equilibria"][i]["jacobian_det"].get<double>() == eqs[i].jacobian_det);
    CHECK(doc["equilibria"][i]["kind"] == std::string(to_string(eqs[i].kind)));
  }
  CHECK(doc["params"]["c"].get<double>() == 1.7);
}

TEST_CASE("portrait csv header and sidecar") {
  const auto sidecar = temp_file("orbits.csv");
  const Outcome r = invoke({"portrait", "--xi-step", "1", "--orbits", sidecar.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows.front() == "xi,phi,psi");
  CHECK(rows.size() == 62);
  const ModelParams p{-1.0, 1.0, -1.0, 1.0};
  double max_phi = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double xi, phi, psi;
    REQUIRE(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf", &xi, &phi, &psi) == 3);
    CHECK(std::abs(hamiltonian({phi, psi}, p).value) < 1e-9);
    max_phi = std::max(max_phi, phi);
  }
  CHECK(max_phi == doctest::Approx(phi_star(p)).epsilon(1e-15));
  std::ifstream in(sidecar);
  std::string header;
  std::getline(in, header);
  CHECK(header == "orbit,level,xi,phi,psi");
  std::string row;
  int count = 0;
  while (std::getline(in, row)) ++count;
  CHECK(count > 100);
  std::filesystem::remove(sidecar);

  CHECK(invoke({"portrait", "--k", "0.5"}).code == 2);
}

TEST_CASE("melnikov csv") {
  const Outcome r = invoke({"melnikov", "--c-step", "0.25"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows.front() == "c,delta,reference");
  CHECK(rows.size() == 13);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double c, delta, reference;
    REQUIRE(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf", &c, &delta, &reference) == 3);
    CHECK(std::abs(delta - reference) < 1e-8);
  }
  // rows at c = 1 for both full variants
  const auto local = lines(invoke({"melnikov", "--c-min", "1", "--c-max", "1"}).out);
  REQUIRE(local.size() == 2);
  CHECK(std::stod(local[1].substr(2)) == doctest::Approx(-6.0 / 7.0));
  const auto nonlocal = lines(invoke({"melnikov", "--variant", "nonlocal", "--c-min", "1", "--c-max", "1"}).out);
  REQUIRE(nonlocal.size() == 2);
  CHECK(std::stod(nonlocal[1].substr(2)) == doctest::Approx(15.0 / 56.0));
  // without a reference polynomial only two columns are written
  CHECK(lines(invoke({"melnikov", "--b", "2", "--c-step", "0.5"}).out).front() == "c,delta");
}

TEST_CASE("speed subcommand and exit codes") {
  const Outcome r = invoke({"speed"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["c_star"].get<double>() == doctest::Approx(std::sqrt(7.0 / 12.0)).epsilon(1e-12));
  CHECK(doc["trace"].size() == doc["iterations"].get<std::size_t>());

  const json delay_only = json::parse(invoke({"speed", "--variant", "nonlocal:noviscous"}).out);
  CHECK(delay_only["c_star"].get<double>() == doctest::Approx(0.546875).epsilon(1e-12));

  const Outcome negative = invoke({"speed", "--variant", "none"});
  CHECK(negative.code == 3);
  CHECK(negative.err.find("one sign") != std::string::npos);
  CHECK(invoke({"speed", "--variant", "none:noviscous"}).code == 2);
  CHECK(invoke({"speed", "--variant", "sideways"}).code == 2);
  CHECK(invoke({"speed", "--format", "xml"}).code == 2);
  CHECK(invoke({"speed", "--bogus"}).code == 2);
  CHECK(invoke({}).code == 2);
}

TEST_CASE("flags override the config file") {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << json{{"variant", "nonlocal"}, {"format", "json"}}.dump();
  }
  const json from_file = json::parse(invoke({"speed", "--config", path.string()}).out);
  CHECK(from_file["variant"] == "nonlocal");
  const json overridden =
      json::parse(invoke({"speed", "--config", path.string(), "--variant", "local"}).out);
  CHECK(overridden["variant"] == "local");
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  CHECK(invoke({"speed", "--config", path.string()}).code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("persist subcommand") {
  const Outcome r = invoke({"persist", "--taus", "0.002,0.001"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "tau,c_hat,error");
  double previous = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double tau, c_hat, error;
    REQUIRE(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf", &tau, &c_hat, &error) == 3);
    CHECK(std::abs(error) < previous);
    previous = std::abs(error);
  }
  CHECK(previous < 0.05);
  CHECK(lines(invoke({"persist", "--taus", "0.001"}).out).size() == 2);
  CHECK(invoke({"persist", "--taus", "0.5"}).code == 2);
}

TEST_CASE("kernel-check subcommand") {
  const Outcome r = invoke({"kernel-check"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  for (const auto& row : doc["strong"]) CHECK(row["mass_error"].get<double>() < 1e-10);
  CHECK(doc["delta_limit"]["sech2"].size() == 3);
  CHECK(invoke({"kernel-check", "--format", "csv"}).code == 2);
}

TEST_CASE("output file") {
  const auto path = temp_file("speed.json");
  REQUIRE(invoke({"speed", "--out", path.string()}).code == 0);
  std::ifstream in(path);
  const json doc = json::parse(in);
  CHECK(doc.contains("c_star"));
  std::filesystem::remove(path);
}
