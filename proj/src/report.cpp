#include "khess/report.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "khess/closed_forms.hpp"
#include "khess/errors.hpp"

namespace khess {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_sig17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_profile_csv(const RadialProfile& profile, std::ostream& os) {
  os << "r,u,du,F\n";
  for (std::size_t i = 0; i < profile.size(); ++i)
    os << format_sig17(profile.grid[i]) << ',' << format_sig17(profile.u[i]) << ','
       << format_sig17(profile.du[i]) << ',' << format_sig17(profile.F[i]) << '\n';
}

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json options_to_json(const SolveOptions& o) {
  return json{{"r_max", o.r_max},
              {"rtol", o.rtol},
              {"atol", o.atol},
              {"r_init", o.r_init},
              {"max_steps", o.max_steps},
              {"grid_output", o.grid_output == GridOutput::LogUniform ? "log_uniform" : "adaptive"},
              {"log_grid_points", o.log_grid_points}};
}

SolveOptions options_from_json(const json& j) {
  SolveOptions o;
  o.r_max = j.at("r_max").get<double>();
  o.rtol = j.at("rtol").get<double>();
  o.atol = j.at("atol").get<double>();
  o.r_init = j.at("r_init").get<double>();
  o.max_steps = j.at("max_steps").get<long>();
  o.grid_output = j.at("grid_output").get<std::string>() == "log_uniform"
                      ? GridOutput::LogUniform
                      : GridOutput::AdaptiveNodes;
  o.log_grid_points = j.at("log_grid_points").get<int>();
  return o;
}

}  // namespace

void write_profile_meta(const RadialProfile& profile, std::ostream& os, bool with_timestamp) {
  json j;
  j["schema_version"] = 1;
  j["params"] = params_to_json(profile.params);
  j["rho"] = profile.rho;
  j["options"] = options_to_json(profile.options);
  json term{{"type", to_string(profile.termination)}};
  if (profile.termination == Termination::ZeroCrossing) term["r_star"] = profile.r_star;
  j["termination"] = term;
  json prov{{"tool", kToolName}, {"version", kToolVersion}};
  if (with_timestamp) prov["timestamp"] = iso_timestamp();
  j["provenance"] = prov;
  os << j.dump(2) << '\n';
}

void save_profile(const RadialProfile& profile, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream csv(fs::path(dir) / "profile.csv");
  write_profile_csv(profile, csv);
  std::ofstream meta(fs::path(dir) / "profile.meta.json");
  write_profile_meta(profile, meta);
  if (!csv || !meta) throw std::runtime_error("save_profile: write failed: " + dir);
}

RadialProfile load_profile(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream meta_is(meta_path);
  if (!meta_is) throw std::runtime_error("load_profile: cannot open " + meta_path);
  json meta = json::parse(meta_is);

  const json& pj = meta.at("params");
  RadialProfile prof;
  prof.params = Params::make(pj.at("n").get<int>(), pj.at("k").get<int>(),
                             pj.at("p").get<double>());
  prof.rho = meta.at("rho").get<double>();
  prof.options = options_from_json(meta.at("options"));
  const json& term = meta.at("termination");
  const std::string type = term.at("type").get<std::string>();
  if (type == "ZeroCrossing") {
    prof.termination = Termination::ZeroCrossing;
    prof.r_star = term.at("r_star").get<double>();
  } else if (type == "StepUnderflow") {
    prof.termination = Termination::StepUnderflow;
  } else {
    prof.termination = Termination::ReachedRmax;
  }

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("load_profile: cannot open " + csv_path);
  std::string line;
  if (!std::getline(csv, line) || line != "r,u,du,F")
    throw std::runtime_error("load_profile: bad CSV header in " + csv_path);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    double v[4];
    const char* s = line.c_str();
    char* end = nullptr;
    for (int i = 0; i < 4; ++i) {
      v[i] = std::strtod(s, &end);
      if (end == s) throw std::runtime_error("load_profile: bad CSV row: " + line);
      s = (*end == ',') ? end + 1 : end;
    }
    prof.grid.push_back(v[0]);
    prof.u.push_back(v[1]);
    prof.du.push_back(v[2]);
    prof.F.push_back(v[3]);
  }
  if (prof.grid.size() < 2) throw std::runtime_error("load_profile: empty profile");
  return prof;
}

RadialProfile load_profile(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p))
    return load_profile((p / "profile.csv").string(), (p / "profile.meta.json").string());
  fs::path meta = p;
  meta.replace_extension();  // drop .csv
  meta += ".meta.json";
  return load_profile(p.string(), meta.string());
}

json params_to_json(const Params& params) {
  return json{{"n", params.n}, {"k", params.k}, {"p", params.p}, {"binom", params.binom}};
}

json exponents_to_json(const ExponentSet& e) {
  json j{{"p_se", e.p_se}, {"p_so", e.p_so}, {"p_star", e.p_star}};
  if (e.jl_finite())
    j["p_jl"] = e.p_jl;
  else
    j["p_jl"] = "inf";
  if (e.p_2)
    j["p_2"] = *e.p_2;
  else
    j["p_2"] = nullptr;
  return j;
}

json regime_to_json(const Regime& regime) {
  return json{{"tag", to_string(regime.tag)},
              {"ge_p_star", regime.ge_p_star},
              {"le_p2", regime.le_p2}};
}

json decay_fit_to_json(const DecayFit& fit) {
  return json{{"exponent", fit.exponent}, {"coefficient", fit.coefficient},
              {"r_lo", fit.r_lo},         {"r_hi", fit.r_hi},
              {"rms_residual", fit.rms_residual}, {"points", fit.points}};
}

json limit_coefficient_to_json(const LimitCoefficient& lc) {
  return json{{"B_estimate", lc.B_estimate}, {"A_target", lc.A_target},
              {"converged", lc.converged},   {"tolerance", lc.tolerance},
              {"oscillation", lc.oscillation}};
}

json pohozaev_to_json(const PohozaevGap& gap) {
  return json{{"R", gap.R}, {"lhs", gap.lhs}, {"rhs", gap.rhs},
              {"relative_gap", gap.relative_gap}};
}

json wolff_to_json(const WolffResult& w) {
  json j{{"lower_ratio", w.lower_ratio},
         {"upper_ratio", w.upper_ratio},
         {"u_inf", w.u_inf},
         {"tail_extended", w.tail_extended}};
  if (w.tail_extended)
    j["tail"] = json{{"coefficient", w.tail.coefficient}, {"exponent", w.tail.exponent}};
  j["radii"] = w.radii;
  j["W"] = w.W;
  j["u"] = w.u;
  return j;
}

json q_sweep_to_json(const std::vector<QSweepEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries)
    arr.push_back(json{{"family", e.family},
                       {"param1", e.param1},
                       {"param2", e.param2},
                       {"Q", e.Q},
                       {"normalized_Q", e.normalized_Q},
                       {"scale", e.scale}});
  return arr;
}

json witness_to_json(const WitnessSearchResult& w) {
  json j{{"best_Q_normalized", w.best_Q_normalized}, {"found_negative", w.found_negative}};
  if (w.witness) {
    j["witness"] = json{{"family", to_string(w.witness->family())},
                        {"a_exponent", w.witness->param1()},
                        {"eps", w.witness->param2()},
                        {"support_lo", w.witness->support_lo()},
                        {"support_hi", w.witness->support_hi()}};
  }
  json table = json::array();
  for (const auto& [eps, qn] : w.eps_table) table.push_back(json{{"eps", eps}, {"Q_normalized", qn}});
  j["eps_table"] = table;
  return j;
}

json tail_stability_to_json(const TailStabilityReport& rep) {
  json j{{"R_requested", rep.R_requested},
         {"r_max", rep.r_max},
         {"family_size", rep.family_size},
         {"min_Q", rep.min_Q},
         {"min_normalized_Q", rep.min_normalized_Q},
         {"all_nonnegative", rep.all_nonnegative}};
  if (std::isnan(rep.stability_radius))
    j["stability_radius"] = nullptr;
  else
    j["stability_radius"] = rep.stability_radius;
  j["entries"] = q_sweep_to_json(rep.entries);
  return j;
}

json stability_condition_to_json(const StabilityCondition& c) {
  return json{{"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}};
}

void write_q_sweep_csv(const std::vector<QSweepEntry>& entries, std::ostream& os) {
  os << "family,param1,param2,Q,normalized_Q\n";
  for (const auto& e : entries)
    os << e.family << ',' << format_sig17(e.param1) << ',' << format_sig17(e.param2) << ','
       << format_sig17(e.Q) << ',' << format_sig17(e.normalized_Q) << '\n';
}

void write_wolff_csv(const WolffResult& w, std::ostream& os) {
  os << "d,W,u,u_over_W\n";
  for (std::size_t i = 0; i < w.radii.size(); ++i)
    os << format_sig17(w.radii[i]) << ',' << format_sig17(w.W[i]) << ','
       << format_sig17(w.u[i]) << ',' << format_sig17(w.u[i] / w.W[i]) << '\n';
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("sweep config: bad number for " + key + ": " + v);
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw std::invalid_argument("sweep config: expected integer for " + key);
  return i;
}

const std::vector<std::string> kKnownRunTokens = {
    "exponents", "solve", "decay", "limitB", "pohozaev",
    "stability315", "wolff", "intersections"};

}  // namespace

SweepConfig SweepConfig::parse(std::istream& is) {
  SweepConfig cfg;
  bool saw_schema = false;
  std::map<int, SweepCase> cases;
  std::map<int, bool> case_has[3];  // n, k, p seen

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("sweep config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "schema_version") {
      cfg.schema_version = parse_int(key, val);
      if (cfg.schema_version != 1)
        throw std::invalid_argument("sweep config: unsupported schema_version " + val);
      saw_schema = true;
    } else if (key == "output_dir") {
      cfg.output_dir = val;
    } else if (key == "rmax") {
      cfg.solver.r_max = parse_double(key, val);
    } else if (key == "rtol") {
      cfg.solver.rtol = parse_double(key, val);
    } else if (key == "atol") {
      cfg.solver.atol = parse_double(key, val);
    } else if (key == "r_init") {
      cfg.solver.r_init = parse_double(key, val);
    } else if (key == "gl_order") {
      cfg.quad.gl_order = parse_int(key, val);
    } else if (key == "panels_per_decade") {
      cfg.quad.panels_per_decade = parse_int(key, val);
    } else if (key.rfind("case.", 0) == 0) {
      const auto parts = split(key, '.');
      if (parts.size() != 3)
        throw std::invalid_argument("sweep config: bad case key " + key);
      const int idx = parse_int(key, parts[1]);
      if (idx < 0) throw std::invalid_argument("sweep config: negative case index");
      SweepCase& c = cases[idx];
      c.index = idx;
      const std::string& field = parts[2];
      if (field == "n") {
        c.n = parse_int(key, val);
        case_has[0][idx] = true;
      } else if (field == "k") {
        c.k = parse_int(key, val);
        case_has[1][idx] = true;
      } else if (field == "p") {
        c.p = parse_double(key, val);
        case_has[2][idx] = true;
      } else if (field == "rho") {
        c.rho = parse_double(key, val);
      } else if (field == "run") {
        c.run = split(val, ',');
      } else {
        throw std::invalid_argument("sweep config: unknown case field " + field);
      }
    } else {
      throw std::invalid_argument("sweep config: unknown key " + key);
    }
  }
  if (!saw_schema) throw std::invalid_argument("sweep config: missing schema_version");

  // fail fast: every case must validate before any case runs
  for (auto& [idx, c] : cases) {
    if (!case_has[0][idx] || !case_has[1][idx] || !case_has[2][idx])
      throw std::invalid_argument("sweep config: case " + std::to_string(idx) +
                                  " missing n/k/p");
    Params::make(c.n, c.k, c.p);  // throws on invalid
    if (!(c.rho > 0.0))
      throw std::invalid_argument("sweep config: case " + std::to_string(idx) +
                                  ": rho must be positive");
    for (const auto& tok : c.run) {
      bool known = false;
      for (const auto& t : kKnownRunTokens) known |= (t == tok);
      if (!known)
        throw std::invalid_argument("sweep config: case " + std::to_string(idx) +
                                    ": unknown run token " + tok);
    }
    cfg.cases.push_back(c);
  }
  return cfg;
}

SweepConfig SweepConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("sweep config: cannot open " + path);
  return parse(is);
}

namespace {

struct CaseOutput {
  std::vector<SweepRow> rows;
};

void add_row(CaseOutput& out, int idx, const std::string& cmd, const std::string& metric,
             const std::string& value) {
  out.rows.push_back(SweepRow{idx, cmd, metric, value});
}

void add_row(CaseOutput& out, int idx, const std::string& cmd, const std::string& metric,
             double value) {
  add_row(out, idx, cmd, metric, format_sig17(value));
}

CaseOutput run_case(const SweepConfig& cfg, const SweepCase& c, const std::string& dir) {
  CaseOutput out;
  const Params params = Params::make(c.n, c.k, c.p);
  fs::create_directories(dir);

  std::optional<RadialProfile> profile;
  auto need_profile = [&]() -> const RadialProfile& {
    if (!profile) {
      profile = solve_ivp(params, c.rho, cfg.solver);
      save_profile(*profile, dir);
    }
    return *profile;
  };

  for (const std::string& tok : c.run) {
    try {
      if (tok == "exponents") {
        const ExponentSet e = compute_exponents(c.n, c.k);
        std::ofstream os(fs::path(dir) / "exponents.json");
        json j{{"params", params_to_json(params)},
               {"exponents", exponents_to_json(e)},
               {"regime", regime_to_json(classify_regime(params))}};
        os << j.dump(2) << '\n';
        add_row(out, c.index, tok, "p_se", e.p_se);
        add_row(out, c.index, tok, "p_so", e.p_so);
        add_row(out, c.index, tok, "p_star", e.p_star);
        add_row(out, c.index, tok, "p_jl", e.jl_finite() ? format_sig17(e.p_jl) : "inf");
        if (e.p_2) add_row(out, c.index, tok, "p_2", *e.p_2);
        add_row(out, c.index, tok, "regime", to_string(classify_regime(params).tag));
      } else if (tok == "solve") {
        const RadialProfile& prof = need_profile();
        add_row(out, c.index, tok, "termination", to_string(prof.termination));
        if (prof.termination == Termination::ZeroCrossing)
          add_row(out, c.index, tok, "r_star", prof.r_star);
        add_row(out, c.index, tok, "r_last", prof.r_last());
        add_row(out, c.index, tok, "u_last", prof.u.back());
        add_row(out, c.index, tok, "nodes", static_cast<double>(prof.size()));
      } else if (tok == "decay") {
        const DecayFit fit = fit_decay_tail(need_profile(), 2.0);
        add_row(out, c.index, tok, "exponent", fit.exponent);
        add_row(out, c.index, tok, "coefficient", fit.coefficient);
        add_row(out, c.index, tok, "rms_residual", fit.rms_residual);
        add_row(out, c.index, tok, "target_exponent", -params.theta());
      } else if (tok == "limitB") {
        const LimitCoefficient lc = limit_coefficient_B(need_profile());
        add_row(out, c.index, tok, "B_estimate", lc.B_estimate);
        add_row(out, c.index, tok, "A_target", lc.A_target);
        add_row(out, c.index, tok, "converged", lc.converged ? "true" : "false");
        add_row(out, c.index, tok, "oscillation", lc.oscillation);
      } else if (tok == "pohozaev") {
        const RadialProfile& prof = need_profile();
        for (double frac : {1e-2, 1e-1, 1.0}) {
          const PohozaevGap gap = pohozaev_residual(prof, frac * prof.r_last());
          add_row(out, c.index, tok, "relative_gap_R" + format_sig17(gap.R),
                  gap.relative_gap);
        }
      } else if (tok == "stability315") {
        const StabilityCondition sc = stability_condition_315(params);
        add_row(out, c.index, tok, "lhs", sc.lhs);
        add_row(out, c.index, tok, "rhs", sc.rhs);
        add_row(out, c.index, tok, "holds", sc.holds ? "true" : "false");
      } else if (tok == "wolff") {
        const RadialProfile& prof = need_profile();
        std::vector<double> radii;
        const double d_lo = std::max(0.1, 10.0 * prof.grid[1]);
        const double d_hi = prof.r_last() / 10.0;
        for (int i = 0; i < 7; ++i)
          radii.push_back(d_lo * std::pow(d_hi / d_lo, i / 6.0));
        const WolffResult w = wolff_bound_check(prof, radii, cfg.quad);
        std::ofstream os(fs::path(dir) / "wolff.csv");
        write_wolff_csv(w, os);
        add_row(out, c.index, tok, "lower_ratio", w.lower_ratio);
        add_row(out, c.index, tok, "upper_ratio", w.upper_ratio);
      } else if (tok == "intersections") {
        const RadialProfile& prof = need_profile();
        const ClosedForm us = ClosedForm::singular(params);
        const ProfileFunction fn(prof);
        const int count =
            intersection_count(fn, us, 2.0 * prof.grid[1], prof.r_last(), 200);
        add_row(out, c.index, tok, "count", static_cast<double>(count));
      }
    } catch (const std::exception& ex) {
      add_row(out, c.index, tok, "error", std::string(ex.what()));
    }
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config, int jobs) {
  if (config.output_dir.empty())
    throw std::invalid_argument("run_sweep: output_dir not set");
  fs::create_directories(config.output_dir);

  const int n_cases = static_cast<int>(config.cases.size());
  std::vector<CaseOutput> outputs(n_cases);
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = static_cast<int>(std::clamp(hw, 1u, 8u));
  }
  jobs = std::min(jobs, std::max(n_cases, 1));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_cases) return;
      const SweepCase& c = config.cases[i];
      char sub[32];
      std::snprintf(sub, sizeof sub, "case_%04d", c.index);
      outputs[i] = run_case(config, c, (fs::path(config.output_dir) / sub).string());
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // aggregate, single-threaded, ordered by case index
  std::vector<SweepRow> rows;
  std::ofstream os(fs::path(config.output_dir) / "summary.csv");
  os << "case,n,k,p,rho,command,metric,value\n";
  for (int i = 0; i < n_cases; ++i) {
    const SweepCase& c = config.cases[i];
    for (const SweepRow& r : outputs[i].rows) {
      os << r.case_index << ',' << c.n << ',' << c.k << ',' << format_sig17(c.p) << ','
         << format_sig17(c.rho) << ',' << r.command << ',' << r.metric << ',' << r.value
         << '\n';
      rows.push_back(r);
    }
  }
  if (!os) throw std::runtime_error("run_sweep: failed writing summary.csv");
  return rows;
}

}  // namespace khess
