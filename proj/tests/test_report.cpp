#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "khess/report.hpp"

using namespace khess;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("khess_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("17 significant digits round-trip binary64 exactly") {
  for (double x : {0.1, 1.0 / 3.0, 2.5505749103631855, 1e-300, 6.62607015e-34,
                   3.9114378277661476}) {
    const std::string s = format_sig17(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("profile save/load round trip is bit exact") {
  const Params prm = Params::make(9, 2, 5.0);
  SolveOptions o;
  o.r_max = 50.0;
  const RadialProfile prof = solve_ivp(prm, 1.0, o);

  const fs::path dir = temp_dir("roundtrip");
  save_profile(prof, dir.string());
  const RadialProfile back = load_profile(dir.string());

  CHECK(back.params.n == prm.n);
  CHECK(back.params.k == prm.k);
  CHECK(back.params.p == prm.p);
  CHECK(back.rho == prof.rho);
  CHECK(back.termination == prof.termination);
  REQUIRE(back.size() == prof.size());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(back.grid[i] == prof.grid[i]);
    CHECK(back.u[i] == prof.u[i]);
    CHECK(back.du[i] == prof.du[i]);
    CHECK(back.F[i] == prof.F[i]);
  }
  // interpolation at grid nodes reproduces stored values bit-identically
  for (std::size_t i = 0; i < prof.size(); i += 5) {
    const auto [u_mem, du_mem] = interpolate(prof, prof.grid[i]);
    const auto [u_back, du_back] = interpolate(back, back.grid[i]);
    CHECK(u_mem == u_back);
    CHECK(du_mem == du_back);
  }
  fs::remove_all(dir);
}

TEST_CASE("zero-crossing metadata survives the round trip") {
  const Params prm = Params::make(9, 2, 4.0);
  SolveOptions o;
  o.r_max = 1e5;
  const RadialProfile prof = solve_ivp(prm, 1.0, o);
  REQUIRE(prof.termination == Termination::ZeroCrossing);
  const fs::path dir = temp_dir("crossing");
  save_profile(prof, dir.string());
  const RadialProfile back = load_profile(dir.string());
  CHECK(back.termination == Termination::ZeroCrossing);
  CHECK(back.r_star == prof.r_star);
  fs::remove_all(dir);
}

TEST_CASE("sweep config parsing") {
  std::stringstream good(R"(
# regime atlas
schema_version = 1
output_dir = out
rmax = 100
case.0.n = 9
case.0.k = 2
case.0.p = 5.0
case.0.rho = 1.0
case.0.run = exponents, solve
case.1.n = 20
case.1.k = 2
case.1.p = 4.0
)");
  const SweepConfig cfg = SweepConfig::parse(good);
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.solver.r_max == 100.0);
  REQUIRE(cfg.cases.size() == 2);
  CHECK(cfg.cases[0].run == std::vector<std::string>{"exponents", "solve"});
  CHECK(cfg.cases[1].run == std::vector<std::string>{"exponents"});  // default
  CHECK(cfg.cases[1].rho == 1.0);
}

TEST_CASE("sweep config is rejected before execution on any invalid case") {
  std::stringstream missing_schema("case.0.n = 9\ncase.0.k = 2\ncase.0.p = 5\n");
  CHECK_THROWS_AS(SweepConfig::parse(missing_schema), std::invalid_argument);

  std::stringstream bad_params(
      "schema_version = 1\ncase.0.n = 9\ncase.0.k = 2\ncase.0.p = 3.5\n");
  CHECK_THROWS_AS(SweepConfig::parse(bad_params), std::domain_error);  // p <= p_se

  std::stringstream bad_token(
      "schema_version = 1\ncase.0.n = 9\ncase.0.k = 2\ncase.0.p = 5\ncase.0.run = plot\n");
  CHECK_THROWS_AS(SweepConfig::parse(bad_token), std::invalid_argument);

  std::stringstream unknown_key("schema_version = 1\nfrobnicate = 3\n");
  CHECK_THROWS_AS(SweepConfig::parse(unknown_key), std::invalid_argument);
}

TEST_CASE("empty sweep produces an empty summary") {
  SweepConfig cfg;
  cfg.output_dir = temp_dir("empty").string();
  const auto rows = run_sweep(cfg);
  CHECK(rows.empty());
  CHECK(slurp(fs::path(cfg.output_dir) / "summary.csv") ==
        "case,n,k,p,rho,command,metric,value\n");
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("sweep runs are deterministic byte for byte") {
  std::stringstream src(R"(
schema_version = 1
rmax = 50
case.0.n = 9
case.0.k = 2
case.0.p = 5.0
case.0.run = exponents, solve, decay, stability315
case.1.n = 20
case.1.k = 2
case.1.p = 4.0
case.1.run = exponents, solve, decay, stability315
case.2.n = 20
case.2.k = 2
case.2.p = 3.0
case.2.run = exponents, stability315
)");
  SweepConfig cfg = SweepConfig::parse(src);

  cfg.output_dir = temp_dir("det_a").string();
  run_sweep(cfg, 3);
  const std::string sum_a = slurp(fs::path(cfg.output_dir) / "summary.csv");
  const std::string prof_a = slurp(fs::path(cfg.output_dir) / "case_0000" / "profile.csv");

  const std::string dir_a = cfg.output_dir;
  cfg.output_dir = temp_dir("det_b").string();
  run_sweep(cfg, 1);
  CHECK(sum_a == slurp(fs::path(cfg.output_dir) / "summary.csv"));
  CHECK(prof_a == slurp(fs::path(cfg.output_dir) / "case_0000" / "profile.csv"));
  CHECK(!sum_a.empty());
  CHECK(sum_a.find("ZeroCrossing") == std::string::npos);  // these cases reach rmax
  fs::remove_all(dir_a);
  fs::remove_all(cfg.output_dir);
}
