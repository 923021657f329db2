#include "khess/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "khess/errors.hpp"

namespace khess {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedRmax: return "ReachedRmax";
    case Termination::ZeroCrossing: return "ZeroCrossing";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

namespace {

// State components: u, F, I_grad, I_pow.
using State = std::array<double, 4>;

struct Rhs {
  double n, k, p, binom;

  double slope_from_F(double r, double F) const {
    if (!(F > 0.0)) return 0.0;
    const double mdu = std::pow(k / binom * F / std::pow(r, n - k), 1.0 / k);
    return -mdu;
  }

  State operator()(double r, const State& y) const {
    const double u = y[0] > 0.0 ? y[0] : 0.0;
    const double du = slope_from_F(r, y[1]);
    const double mdu = -du;
    const double up = u > 0.0 ? std::pow(u, p) : 0.0;
    const double rn1 = std::pow(r, n - 1.0);
    State d;
    d[0] = du;
    d[1] = rn1 * up;
    d[2] = std::pow(r, n - k) * std::pow(mdu, k + 1.0);
    d[3] = rn1 * up * u;
    return d;
  }
};

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct StepResult {
  State y;      // 5th-order solution
  State err;    // embedded error estimate
  State k7;     // FSAL stage
};

StepResult dp_step(const Rhs& f, double r, const State& y, const State& k1, double h) {
  auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (auto& [a, v] : terms)
      for (int i = 0; i < 4; ++i) out[i] += h * a * (*v)[i];
    return out;
  };
  const State k2 = f(r + c2 * h, axpy({{a21, &k1}}));
  const State k3 = f(r + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
  const State k4 = f(r + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State k5 = f(r + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State k6 = f(r + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));

  StepResult res;
  for (int i = 0; i < 4; ++i)
    res.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  res.k7 = f(r + h, res.y);
  for (int i = 0; i < 4; ++i)
    res.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                      e7 * res.k7[i]);
  return res;
}

double error_norm(const State& y0, const State& y1, const State& err, double rtol,
                  double atol) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sc = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double q = err[i] / sc;
    sum += q * q;
  }
  return std::sqrt(sum / 4.0);
}

}  // namespace

RadialProfile solve_ivp(const Params& params, double rho, const SolveOptions& opts_in) {
  if (!(rho > 0.0)) throw std::domain_error("solve_ivp: rho must be positive");
  if (!(opts_in.rtol > 0.0) || !(opts_in.atol > 0.0))
    throw std::domain_error("solve_ivp: tolerances must be positive");

  SolveOptions opts = opts_in;
  const double n = params.n, k = params.k, p = params.p;
  const double length_scale = std::pow(rho, -(p - k) / (2.0 * k));
  if (opts.r_init <= 0.0) opts.r_init = 1e-6 * length_scale;
  if (!(opts.r_init < opts.r_max))
    throw std::domain_error("solve_ivp: need r_init < r_max");

  RadialProfile prof;
  prof.params = params;
  prof.rho = rho;
  prof.options = opts;

  const Rhs f{n, k, p, params.binom};

  auto push_node = [&](double r, const State& y) {
    prof.grid.push_back(r);
    prof.u.push_back(y[0]);
    prof.du.push_back(r > 0.0 ? f.slope_from_F(r, y[1]) : 0.0);
    prof.F.push_back(y[1]);
    prof.I_grad.push_back(y[2]);
    prof.I_pow.push_back(y[3]);
  };

  // Center node, then the series start at r_init:
  //   u ~ rho - (1/2) (k rho^p / (n C))^{1/k} r^2,  F ~ rho^p r^n / n.
  push_node(0.0, State{rho, 0.0, 0.0, 0.0});

  double r = opts.r_init;
  const double slope_coeff = std::pow(k * std::pow(rho, p) / (n * params.binom), 1.0 / k);
  State y;
  y[0] = rho - 0.5 * slope_coeff * r * r;
  y[1] = std::pow(rho, p) * std::pow(r, n) / n;
  y[2] = std::pow(slope_coeff, k + 1.0) * std::pow(r, n + 2.0) / (n + 2.0);
  y[3] = std::pow(rho, p + 1.0) * std::pow(r, n) / n;
  push_node(r, y);

  State k1 = f(r, y);
  double h = 0.1 * r;
  long steps = 0;
  prof.termination = Termination::ReachedRmax;

  while (r < opts.r_max) {
    if (++steps > opts.max_steps)
      throw NumericalError("solve_ivp: max_steps exceeded");
    h = std::min(h, 0.1 * r);
    if (h < 1e-14 * r) {
      prof.termination = Termination::StepUnderflow;
      return prof;
    }
    bool at_end = false;
    if (r + h >= opts.r_max) {
      h = opts.r_max - r;
      at_end = true;
    }

    const StepResult s = dp_step(f, r, y, k1, h);
    const double err = error_norm(y, s.y, s.err, opts.rtol, opts.atol);

    if (err <= 1.0 && s.y[0] > 0.0) {
      r += h;
      y = s.y;
      k1 = s.k7;  // FSAL
      push_node(r, y);
      if (at_end) break;
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      h *= fac;
      continue;
    }

    if (err <= 1.0 && s.y[0] <= 0.0) {
      // u crossed zero inside this step: bisect on the substep length.
      double lo = 0.0, hi = h, r_star = r + h;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const StepResult sm = dp_step(f, r, y, k1, mid);
        if (std::fabs(sm.y[0]) <= opts.atol || hi - lo <= 1e-16 * (r + mid)) {
          r_star = r + mid;
          break;
        }
        if (sm.y[0] > 0.0)
          lo = mid;
        else
          hi = mid;
        r_star = r + mid;
      }
      prof.termination = Termination::ZeroCrossing;
      prof.r_star = r_star;
      break;
    }

    // rejected step
    const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    h *= std::min(fac, 0.5);
  }

  if (opts.grid_output == GridOutput::LogUniform)
    prof = resample_log_uniform(prof, opts.log_grid_points);
  return prof;
}

RadialProfile rescale(const RadialProfile& profile, double mu) {
  if (!(mu > 0.0)) throw std::domain_error("rescale: mu must be positive");
  const Params& prm = profile.params;
  const double theta = prm.theta();
  const double su = std::pow(mu, theta);
  const double sdu = std::pow(mu, theta + 1.0);
  const double sF = std::pow(mu, prm.p * theta - prm.n);
  const double sI = std::pow(mu, (prm.p + 1.0) * theta - prm.n);

  RadialProfile out;
  out.params = prm;
  out.rho = su * profile.rho;
  out.options = profile.options;
  out.options.r_max = profile.options.r_max / mu;
  out.options.r_init = profile.options.r_init / mu;
  out.termination = profile.termination;
  out.r_star = profile.r_star / mu;

  const std::size_t m = profile.size();
  const bool has_extras = profile.I_grad.size() == m && profile.I_pow.size() == m;
  out.grid.resize(m);
  out.u.resize(m);
  out.du.resize(m);
  out.F.resize(m);
  if (has_extras) {
    out.I_grad.resize(m);
    out.I_pow.resize(m);
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.grid[i] = profile.grid[i] / mu;
    out.u[i] = su * profile.u[i];
    out.du[i] = sdu * profile.du[i];
    out.F[i] = sF * profile.F[i];
    if (has_extras) {
      out.I_grad[i] = sI * profile.I_grad[i];
      out.I_pow[i] = sI * profile.I_pow[i];
    }
  }
  return out;
}

namespace {

std::size_t find_segment(const std::vector<double>& grid, double r) {
  // grid[i] <= r < grid[i+1]
  auto it = std::upper_bound(grid.begin(), grid.end(), r);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) throw std::out_of_range("interpolate: r below grid");
  return std::min(i - 1, grid.size() - 2);
}

// Monotonicity-limited slope for cubic Hermite (Fritsch-Carlson bound).
double limit_slope(double s, double delta) {
  if (delta > 0.0) return std::clamp(s, 0.0, 3.0 * delta);
  if (delta < 0.0) return std::clamp(s, 3.0 * delta, 0.0);
  return 0.0;
}

double hermite(double rl, double rr, double yl, double yr, double sl, double sr, double r) {
  const double h = rr - rl;
  const double delta = (yr - yl) / h;
  sl = limit_slope(sl, delta);
  sr = limit_slope(sr, delta);
  const double t = (r - rl) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * yl + h * h10 * sl + h01 * yr + h * h11 * sr;
}

double source_slope(const RadialProfile& p, std::size_t i) {
  // F' = r^{n-1} u^p at node i
  const double r = p.grid[i];
  if (r <= 0.0) return 0.0;
  return std::pow(r, p.params.n - 1.0) * std::pow(std::max(p.u[i], 0.0), p.params.p);
}

}  // namespace

std::pair<double, double> interpolate(const RadialProfile& profile, double r) {
  if (profile.size() < 2) throw std::out_of_range("interpolate: profile too small");
  if (r < 0.0 || r > profile.r_last())
    throw std::out_of_range("interpolate: r outside grid");

  // exact node hit returns stored values bit-identically
  auto it = std::lower_bound(profile.grid.begin(), profile.grid.end(), r);
  if (it != profile.grid.end() && *it == r) {
    const std::size_t i = static_cast<std::size_t>(it - profile.grid.begin());
    return {profile.u[i], profile.du[i]};
  }

  const std::size_t i = find_segment(profile.grid, r);
  const double rl = profile.grid[i], rr = profile.grid[i + 1];
  const double uval =
      hermite(rl, rr, profile.u[i], profile.u[i + 1], profile.du[i], profile.du[i + 1], r);

  const double Fval = hermite(rl, rr, profile.F[i], profile.F[i + 1], source_slope(profile, i),
                              source_slope(profile, i + 1), r);
  const Params& prm = profile.params;
  double du = 0.0;
  if (r > 0.0 && Fval > 0.0)
    du = -std::pow(prm.k / prm.binom * Fval / std::pow(r, prm.n - prm.k), 1.0 / prm.k);
  return {uval, du};
}

RadialProfile resample_log_uniform(const RadialProfile& profile, int count) {
  if (count < 2) throw std::domain_error("resample_log_uniform: count too small");
  if (profile.size() < 3) return profile;

  RadialProfile out;
  out.params = profile.params;
  out.rho = profile.rho;
  out.options = profile.options;
  out.options.grid_output = GridOutput::LogUniform;
  out.termination = profile.termination;
  out.r_star = profile.r_star;

  const double r_lo = profile.grid[1];
  const double r_hi = profile.r_last();
  const bool has_extras =
      profile.I_grad.size() == profile.size() && profile.I_pow.size() == profile.size();

  auto push = [&](double r, double u, double du, double F, double Ig, double Ip) {
    out.grid.push_back(r);
    out.u.push_back(u);
    out.du.push_back(du);
    out.F.push_back(F);
    if (has_extras) {
      out.I_grad.push_back(Ig);
      out.I_pow.push_back(Ip);
    }
  };
  push(0.0, profile.u[0], 0.0, 0.0, 0.0, 0.0);

  for (int j = 0; j < count; ++j) {
    const double r = (j == count - 1)
                         ? r_hi
                         : r_lo * std::pow(r_hi / r_lo, static_cast<double>(j) / (count - 1));
    auto [uval, du] = interpolate(profile, r);
    const std::size_t i = find_segment(profile.grid, r);
    const double rl = profile.grid[i], rr = profile.grid[i + 1];
    const double F = hermite(rl, rr, profile.F[i], profile.F[i + 1], source_slope(profile, i),
                             source_slope(profile, i + 1), r);
    // cumulative integrals resampled with their known integrand slopes
    double Ig = 0.0, Ip = 0.0;
    if (has_extras) {
      const Params& prm = profile.params;
      auto ig_slope = [&](std::size_t j) {
        return std::pow(profile.grid[j], prm.n - static_cast<double>(prm.k)) *
               std::pow(-profile.du[j], prm.k + 1.0);
      };
      auto ip_slope = [&](std::size_t j) {
        return std::pow(profile.grid[j], prm.n - 1.0) *
               std::pow(std::max(profile.u[j], 0.0), prm.p + 1.0);
      };
      Ig = hermite(rl, rr, profile.I_grad[i], profile.I_grad[i + 1], ig_slope(i),
                   ig_slope(i + 1), r);
      Ip = hermite(rl, rr, profile.I_pow[i], profile.I_pow[i + 1], ip_slope(i),
                   ip_slope(i + 1), r);
    }
    push(r, uval, du, F, Ig, Ip);
  }
  return out;
}

double PowerLawTail::value(double r) const { return coefficient * std::pow(r, exponent); }
double PowerLawTail::deriv(double r) const {
  return coefficient * exponent * std::pow(r, exponent - 1.0);
}

ProfileFunction::ProfileFunction(const RadialProfile& profile) : profile_(profile) {}

ProfileFunction::ProfileFunction(const RadialProfile& profile, PowerLawTail tail)
    : profile_(profile), tail_(tail), has_tail_(true) {}

double ProfileFunction::r_last() const { return profile_.r_last(); }

double ProfileFunction::value(double r) const {
  if (r <= profile_.r_last()) return interpolate(profile_, r).first;
  if (has_tail_) return tail_.value(r);
  if (profile_.termination == Termination::ZeroCrossing) return 0.0;
  throw std::out_of_range("ProfileFunction: r beyond grid and no tail extension");
}

double ProfileFunction::deriv(double r) const {
  if (r <= profile_.r_last()) return interpolate(profile_, r).second;
  if (has_tail_) return tail_.deriv(r);
  if (profile_.termination == Termination::ZeroCrossing) return 0.0;
  throw std::out_of_range("ProfileFunction: r beyond grid and no tail extension");
}

}  // namespace khess
