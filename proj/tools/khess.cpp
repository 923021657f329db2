// Command-line surface for the radial k-Hessian laboratory: critical
// exponents, IVP solves, profile analysis, and batch sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "khess/asymptotics.hpp"
#include "khess/closed_forms.hpp"
#include "khess/errors.hpp"
#include "khess/params.hpp"
#include "khess/report.hpp"
#include "khess/solver.hpp"
#include "khess/variational.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace khess;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

std::string default_out_dir() {
  const char* env = std::getenv(kOutputDirEnvVar);
  return env && *env ? env : ".";
}

void emit(const json& j, const std::string& out, const std::string& format) {
  std::string text;
  if (format == "csv") {
    // flat metric,value table
    std::ostringstream os;
    os << "metric,value\n";
    std::function<void(const std::string&, const json&)> walk = [&](const std::string& prefix,
                                                                    const json& v) {
      if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it)
          walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
      } else if (v.is_array()) {
        int i = 0;
        for (const auto& el : v) walk(prefix + "." + std::to_string(i++), el);
      } else if (v.is_number_float()) {
        os << prefix << ',' << format_sig17(v.get<double>()) << '\n';
      } else {
        os << prefix << ',' << v.dump() << '\n';
      }
    };
    walk("", j);
    text = os.str();
  } else {
    text = j.dump(2) + "\n";
  }
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream os(out);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + out);
  }
}

struct ExponentsArgs {
  int n = 0, k = 0;
  std::optional<double> p;
  std::string out, format = "json";
};

int cmd_exponents(const ExponentsArgs& a) {
  const ExponentSet e = compute_exponents(a.n, a.k);
  json j{{"n", a.n}, {"k", a.k}, {"exponents", exponents_to_json(e)}};
  if (a.p) {
    const Params params = Params::make(a.n, a.k, *a.p);
    j["p"] = *a.p;
    j["regime"] = regime_to_json(classify_regime(params));
    j["stability_condition"] = stability_condition_to_json(stability_condition_315(params));
  }
  emit(j, a.out, a.format);
  return 0;
}

struct SolveArgs {
  int n = 0, k = 0;
  double p = 0.0, rho = 1.0;
  SolveOptions opts;
  std::string grid = "adaptive";
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  const Params params = Params::make(a.n, a.k, a.p);
  SolveOptions opts = a.opts;
  opts.grid_output = a.grid == "loguniform" ? GridOutput::LogUniform : GridOutput::AdaptiveNodes;
  const RadialProfile prof = solve_ivp(params, a.rho, opts);
  const std::string dir = a.out.empty() ? default_out_dir() : a.out;
  save_profile(prof, dir);
  std::cerr << "profile: " << (fs::path(dir) / "profile.csv").string()
            << " termination=" << to_string(prof.termination);
  if (prof.termination == Termination::ZeroCrossing)
    std::cerr << " r_star=" << format_sig17(prof.r_star);
  std::cerr << '\n';
  return prof.termination == Termination::StepUnderflow ? kExitNumerical : 0;
}

struct AnalyzeArgs {
  std::string profile_path;
  std::vector<std::string> analyses;
  std::string solution = "singular";  // singular | profile (for stability)
  std::string family = "both";        // hardy | bump | both
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<double> radii;
  std::string out, format = "json";
};

int cmd_analyze(const AnalyzeArgs& a) {
  const RadialProfile prof = load_profile(a.profile_path);
  const Params& params = prof.params;
  const ExponentSet expo = compute_exponents(params.n, params.k);
  json rep{{"profile", a.profile_path},
           {"params", params_to_json(params)},
           {"rho", prof.rho},
           {"termination", to_string(prof.termination)}};

  const std::string out_dir = a.out.empty() ? default_out_dir() : a.out;
  std::vector<double> radii = a.radii;
  if (radii.empty())
    for (double f : {1e-2, 1e-1, 1.0}) radii.push_back(f * prof.r_last());

  for (const std::string& an : a.analyses) {
    if (an == "decay") {
      const DecayFit fit = (a.window_lo > 0.0 && a.window_hi > a.window_lo)
                               ? fit_decay(prof, a.window_lo, a.window_hi)
                               : fit_decay_tail(prof, 2.0);
      json j = decay_fit_to_json(fit);
      j["target_exponent"] = -params.theta();
      rep["decay"] = j;
    } else if (an == "limitB") {
      rep["limitB"] = limit_coefficient_to_json(limit_coefficient_B(prof));
    } else if (an == "pohozaev") {
      json arr = json::array();
      for (double R : radii) arr.push_back(pohozaev_to_json(pohozaev_residual(prof, R)));
      rep["pohozaev"] = arr;
    } else if (an == "wolff") {
      std::vector<double> d;
      const double lo = std::max(0.1, 10.0 * prof.grid[1]);
      const double hi = prof.r_last() / 10.0;
      for (int i = 0; i < 7; ++i) d.push_back(lo * std::pow(hi / lo, i / 6.0));
      const WolffResult w = wolff_bound_check(prof, d);
      rep["wolff"] = wolff_to_json(w);
      if (a.format == "csv") {
        std::ofstream os(fs::path(out_dir) / "wolff.csv");
        write_wolff_csv(w, os);
      }
    } else if (an == "stability") {
      std::unique_ptr<RadialFunction> u;
      if (a.solution == "singular") {
        u = std::make_unique<ClosedForm>(ClosedForm::singular(params));
      } else {
        u = std::make_unique<ProfileFunction>(prof);
      }
      const int n_annular = a.family == "hardy" ? 0 : 25;
      const int n_hardy = a.family == "bump" ? 0 : 25;
      const auto fam = make_q_family(params, n_annular, n_hardy, 1e-4, 1e4);
      const auto sweep = q_sweep(*u, params, fam);
      rep["stability"] = {{"solution", a.solution}, {"q_table", q_sweep_to_json(sweep)}};
      if (a.format == "csv") {
        std::ofstream os(fs::path(out_dir) / "q_table.csv");
        write_q_sweep_csv(sweep, os);
      }
      if (a.solution == "singular" && params.n >= 2 * params.k + 9 && expo.p_2 &&
          params.p > *expo.p_2) {
        std::vector<double> eps;
        for (int e = 2; e <= 8; ++e) eps.push_back(std::pow(10.0, -e));
        rep["stability"]["witness_search"] =
            witness_to_json(instability_witness_search(params, *u, eps));
      }
    } else if (an == "intersections") {
      const ClosedForm us = ClosedForm::singular(params);
      const ProfileFunction fn(prof);
      const double lo = 2.0 * prof.grid[1], hi = prof.r_last();
      rep["intersections"] = {
          {"count", intersection_count(fn, us, lo, hi, 200)},
          {"window", {lo, hi}},
          {"profile_below_singular",
           [&] {
             for (int i = 0; i <= 100; ++i) {
               const double r = lo * std::pow(hi / lo, i / 100.0);
               if (fn.value(r) >= us.value(r)) return false;
             }
             return true;
           }()}};
    } else {
      throw std::invalid_argument("unknown analysis: " + an);
    }
  }

  emit(rep, a.out.empty() ? "" : (fs::path(out_dir) / "analysis.json").string(), "json");
  return 0;
}

struct SweepArgs {
  std::string config_path;
  int jobs = 0;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig cfg = SweepConfig::parse_file(a.config_path);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (cfg.output_dir.empty()) cfg.output_dir = default_out_dir();
  const auto rows = run_sweep(cfg, a.jobs);
  std::cerr << "sweep: " << cfg.cases.size() << " cases, " << rows.size() << " rows -> "
            << (fs::path(cfg.output_dir) / "summary.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial k-Hessian laboratory: exponents, solves, analysis, sweeps"};
  app.require_subcommand(1);

  ExponentsArgs ea;
  auto* exp_cmd = app.add_subcommand("exponents", "critical exponents and regime for (n, k [, p])");
  exp_cmd->add_option("--n", ea.n, "dimension")->required();
  exp_cmd->add_option("--k", ea.k, "Hessian order")->required();
  double ep = 0.0;
  auto* ep_opt = exp_cmd->add_option("--p", ep, "nonlinearity exponent (adds regime classification)");
  exp_cmd->add_option("--out", ea.out, "output file (default stdout)");
  exp_cmd->add_option("--format", ea.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "integrate the regular IVP and write profile.csv");
  solve_cmd->add_option("--n", sa.n)->required();
  solve_cmd->add_option("--k", sa.k)->required();
  solve_cmd->add_option("--p", sa.p)->required();
  solve_cmd->add_option("--rho", sa.rho, "center value u(0)")->required();
  solve_cmd->add_option("--rmax", sa.opts.r_max, "integration end radius");
  solve_cmd->add_option("--rtol", sa.opts.rtol);
  solve_cmd->add_option("--atol", sa.opts.atol);
  solve_cmd->add_option("--r-init", sa.opts.r_init, "series start radius (0 = auto)");
  solve_cmd->add_option("--grid", sa.grid, "adaptive|loguniform")
      ->check(CLI::IsMember({"adaptive", "loguniform"}));
  solve_cmd->add_option("--points", sa.opts.log_grid_points, "log-uniform grid size");
  solve_cmd->add_option("--out", sa.out, "output directory (default $KHESS_OUT_DIR or .)");

  AnalyzeArgs aa;
  auto* an_cmd = app.add_subcommand("analyze", "run analyses on a stored profile");
  an_cmd->add_option("profile", aa.profile_path, "profile directory or profile.csv path")
      ->required();
  an_cmd->add_option("--analyses", aa.analyses,
                     "decay,limitB,pohozaev,wolff,stability,intersections")
      ->delimiter(',')
      ->required();
  an_cmd->add_option("--solution", aa.solution, "stability around: singular|profile")
      ->check(CLI::IsMember({"singular", "profile"}));
  an_cmd->add_option("--family", aa.family, "hardy|bump|both")
      ->check(CLI::IsMember({"hardy", "bump", "both"}));
  an_cmd->add_option("--window-lo", aa.window_lo, "decay-fit window start");
  an_cmd->add_option("--window-hi", aa.window_hi, "decay-fit window end");
  an_cmd->add_option("--radii", aa.radii, "radii for pohozaev")->delimiter(',');
  an_cmd->add_option("--out", aa.out, "output directory (default stdout)");
  an_cmd->add_option("--format", aa.format, "json|csv (csv adds table files)")
      ->check(CLI::IsMember({"json", "csv"}));

  SweepArgs wa;
  auto* sw_cmd = app.add_subcommand("sweep", "run a batch sweep from a config file");
  sw_cmd->add_option("config", wa.config_path, "sweep config path")->required();
  sw_cmd->add_option("--jobs", wa.jobs, "worker threads (0 = auto)");
  sw_cmd->add_option("--out", wa.out, "override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*exp_cmd) {
      if (*ep_opt) ea.p = ep;
      return cmd_exponents(ea);
    }
    if (*solve_cmd) return cmd_solve(sa);
    if (*an_cmd) return cmd_analyze(aa);
    if (*sw_cmd) return cmd_sweep(wa);
  } catch (const QuadratureError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NotApplicableError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
