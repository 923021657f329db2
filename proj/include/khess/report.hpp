#ifndef KHESS_REPORT_HPP
#define KHESS_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "khess/asymptotics.hpp"
#include "khess/params.hpp"
#include "khess/solver.hpp"
#include "khess/variational.hpp"

namespace khess {

inline constexpr const char* kToolName = "khess";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnvVar = "KHESS_OUT_DIR";

// 17 significant digits: lossless decimal round-trip of binary64.
std::string format_sig17(double x);

// Profile CSV with header r,u,du,F (17 significant digits per field) and
// its JSON metadata sidecar.
void write_profile_csv(const RadialProfile& profile, std::ostream& os);
void write_profile_meta(const RadialProfile& profile, std::ostream& os,
                        bool with_timestamp = true);
void save_profile(const RadialProfile& profile, const std::string& dir);
RadialProfile load_profile(const std::string& csv_path, const std::string& meta_path);
// Accepts a directory containing profile.csv/profile.meta.json, or the csv path.
RadialProfile load_profile(const std::string& path);

nlohmann::json params_to_json(const Params& params);
nlohmann::json exponents_to_json(const ExponentSet& e);
nlohmann::json regime_to_json(const Regime& regime);
nlohmann::json decay_fit_to_json(const DecayFit& fit);
nlohmann::json limit_coefficient_to_json(const LimitCoefficient& lc);
nlohmann::json pohozaev_to_json(const PohozaevGap& gap);
nlohmann::json wolff_to_json(const WolffResult& w);
nlohmann::json q_sweep_to_json(const std::vector<QSweepEntry>& entries);
nlohmann::json witness_to_json(const WitnessSearchResult& w);
nlohmann::json tail_stability_to_json(const TailStabilityReport& rep);
nlohmann::json stability_condition_to_json(const StabilityCondition& c);

// Q-sweep CSV: family,param1,param2,Q,normalized_Q
void write_q_sweep_csv(const std::vector<QSweepEntry>& entries, std::ostream& os);
// Wolff CSV: d,W,u,u_over_W
void write_wolff_csv(const WolffResult& w, std::ostream& os);

// Flat key = value sweep configuration (schema_version required):
//
//   schema_version = 1
//   output_dir = sweep_out
//   rmax = 1e4
//   rtol = 1e-10
//   case.0.n = 9
//   case.0.k = 2
//   case.0.p = 5.0
//   case.0.rho = 1.0
//   case.0.run = exponents,solve,decay
//
// '#' starts a comment. Every case is validated before any case runs.
struct SweepCase {
  int index = 0;
  int n = 0, k = 0;
  double p = 0.0;
  double rho = 1.0;
  std::vector<std::string> run{"exponents"};
};

struct SweepConfig {
  int schema_version = 1;
  std::string output_dir;
  SolveOptions solver;
  QuadratureSpec quad;
  std::vector<SweepCase> cases;  // ordered by index

  static SweepConfig parse(std::istream& is);
  static SweepConfig parse_file(const std::string& path);
};

struct SweepRow {
  int case_index = 0;
  std::string command;
  std::string metric;
  std::string value;
};

// Runs every case (worker pool of `jobs` threads), writing one directory
// per case under config.output_dir plus an aggregate summary.csv ordered
// by case index. Returns the summary rows.
std::vector<SweepRow> run_sweep(const SweepConfig& config, int jobs = 0);

}  // namespace khess

#endif
