#include "khess/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "khess/closed_forms.hpp"
#include "khess/errors.hpp"

namespace khess {

DecayFit fit_power_law(std::span<const double> r, std::span<const double> u, double r_lo,
                       double r_hi) {
  if (r.size() != u.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw std::invalid_argument("fit_power_law: bad window");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    if (!(u[i] > 0.0)) throw std::invalid_argument("fit_power_law: u must be positive");
    const double x = std::log(r[i]), y = std::log(u[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 10) throw std::invalid_argument("fit_power_law: fewer than 10 points in window");

  const double det = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / det;
  const double intercept = (sy * sxx - sx * sxy) / det;

  double ss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    const double res = std::log(u[i]) - (slope * std::log(r[i]) + intercept);
    ss += res * res;
  }

  DecayFit fit;
  fit.exponent = slope;
  fit.coefficient = std::exp(intercept);
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  fit.rms_residual = std::sqrt(ss / m);
  fit.points = m;
  return fit;
}

DecayFit fit_decay(const RadialProfile& profile, double r_lo, double r_hi) {
  if (!(r_lo >= 0.0) || !(r_hi <= profile.r_last()))
    throw std::invalid_argument("fit_decay: window outside grid");
  return fit_power_law(profile.grid, profile.u, r_lo, r_hi);
}

DecayFit fit_decay_tail(const RadialProfile& profile, double decades) {
  const double hi = profile.r_last();
  return fit_decay(profile, hi / std::pow(10.0, decades), hi);
}

LimitCoefficient limit_coefficient_B(const RadialProfile& profile, double tolerance) {
  const Params& prm = profile.params;
  const ExponentSet e = compute_exponents(prm.n, prm.k);
  if (!(prm.p > e.p_so))
    throw NotApplicableError("limit_coefficient_B: requires p > p_so");
  if (profile.termination != Termination::ReachedRmax)
    throw NotApplicableError("limit_coefficient_B: requires a profile that reached r_max");

  const double theta = prm.theta();
  const double hi = profile.r_last(), lo = hi / 10.0;
  std::vector<double> vals;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.grid[i] >= lo && profile.grid[i] <= hi)
      vals.push_back(profile.u[i] * std::pow(profile.grid[i], theta));
  if (vals.size() < 3)
    throw NotApplicableError("limit_coefficient_B: too few nodes in the last decade");

  std::sort(vals.begin(), vals.end());
  const double median = vals[vals.size() / 2];

  LimitCoefficient out;
  out.B_estimate = median;
  out.A_target = singular_coefficient_A(prm);
  out.tolerance = tolerance;
  out.converged = std::fabs(out.B_estimate / out.A_target - 1.0) <= tolerance;
  out.oscillation = (vals.back() - vals.front()) / median;
  return out;
}

int intersection_count(const RadialFunction& f, const RadialFunction& g, double r_lo,
                       double r_hi, int samples) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || samples < 2)
    throw std::invalid_argument("intersection_count: bad window or sample count");
  auto diff = [&](double r) { return f.value(r) - g.value(r); };

  int crossings = 0;
  double prev_r = r_lo, prev_d = diff(r_lo);
  for (int i = 1; i < samples; ++i) {
    const double r =
        r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (samples - 1));
    const double d = diff(r);
    if (prev_d == 0.0) {
      prev_r = r;
      prev_d = d;
      continue;  // grazing zero at a sample point is not a sign change
    }
    if (d != 0.0 && std::signbit(d) != std::signbit(prev_d)) {
      // bisection refinement to 1e-8 relative radius
      double a = prev_r, b = r, da = prev_d;
      while (b - a > 1e-8 * b) {
        const double mid = 0.5 * (a + b);
        const double dm = diff(mid);
        if (dm == 0.0) break;
        if (std::signbit(dm) == std::signbit(da)) {
          a = mid;
          da = dm;
        } else {
          b = mid;
        }
      }
      ++crossings;
    }
    prev_r = r;
    prev_d = d;
  }
  return crossings;
}

double unit_sphere_area(int dim) {
  if (dim < 1) throw std::domain_error("unit_sphere_area: dim must be >= 1");
  return 2.0 * std::pow(M_PI, dim / 2.0) / std::tgamma(dim / 2.0);
}

double sin_power_integral(int m, double theta, double rel_tol) {
  if (m < 0) throw std::domain_error("sin_power_integral: m must be >= 0");
  if (theta <= 0.0) return 0.0;
  theta = std::min(theta, M_PI);
  auto f = [m](double x) { return std::pow(std::sin(x), m); };
  // absolute floor keeps tiny caps from demanding needless refinement
  return integrate_adaptive(f, 0.0, theta, rel_tol, 1e-300);
}

double sphere_cap_area(int n, double s, double d, double t) {
  if (!(s >= 0.0) || !(d > 0.0) || !(t >= 0.0))
    throw std::domain_error("sphere_cap_area: bad geometry");
  if (s == 0.0) return 0.0;
  if (s + d <= t) return unit_sphere_area(n) * std::pow(s, n - 1.0);
  if (std::fabs(s - d) >= t) return 0.0;
  double cos_star = (s * s + d * d - t * t) / (2.0 * s * d);
  cos_star = std::clamp(cos_star, -1.0, 1.0);
  const double theta_star = std::acos(cos_star);
  return unit_sphere_area(n - 1) * std::pow(s, n - 1.0) *
         sin_power_integral(n - 2, theta_star);
}

namespace {

// Cached cumulative integral m_full(x) = int_0^x s^{n-1} u^p(s) ds on a
// geometric grid, extended on demand; queried with one extra panel from
// the nearest cached boundary.
class CumulativeSource {
 public:
  CumulativeSource(const RadialFunction& u_fn, const Params& params, double r_min,
                   const QuadratureSpec& quad)
      : u_fn_(u_fn), params_(params), quad_(quad), r_min_(r_min) {
    ratio_ = std::pow(10.0, 1.0 / std::max(4, quad.panels_per_decade));
    bounds_.push_back(r_min);
    prefix_.push_back(0.0);  // contribution of (0, r_min) is negligible: the
                             // integrand is O(s^{n-1-p theta}), exponent > -1
  }

  double integrand(double s) const {
    const double u = u_fn_.value(s);
    if (!(u > 0.0)) return 0.0;
    return std::pow(s, params_.n - 1.0) * std::pow(u, params_.p);
  }

  double operator()(double x) {
    if (x <= r_min_) return 0.0;
    ensure(x);
    const auto it = std::upper_bound(bounds_.begin(), bounds_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - bounds_.begin()) - 1;
    const GaussLegendre& gl = GaussLegendre::cached(quad_.gl_order);
    return prefix_[i] +
           gl.integrate([this](double s) { return integrand(s); }, bounds_[i], x);
  }

 private:
  void ensure(double x) {
    const GaussLegendre& gl = GaussLegendre::cached(quad_.gl_order);
    while (bounds_.back() < x) {
      const double lo = bounds_.back(), hi = lo * ratio_;
      prefix_.push_back(prefix_.back() +
                        gl.integrate([this](double s) { return integrand(s); }, lo, hi));
      bounds_.push_back(hi);
    }
  }

  const RadialFunction& u_fn_;
  const Params& params_;
  QuadratureSpec quad_;
  double r_min_;
  double ratio_ = 0.0;
  std::vector<double> bounds_;
  std::vector<double> prefix_;
};

// int_{B_t(x)} u^p dy for |x| = d, via the spherical-cap reduction.
class BallMass {
 public:
  BallMass(const RadialFunction& u_fn, const Params& params, double d,
           const QuadratureSpec& quad)
      : u_fn_(u_fn),
        params_(params),
        d_(d),
        quad_(quad),
        cum_(u_fn, params, std::min(quad.graded_r_min, 1e-6 * d), quad) {
    // cap integrands vanish algebraically at the edges; panel counts
    // dominate the cost here
    quad_.edge_refine = false;
    quad_.min_panels = std::min(quad.min_panels, 12);
  }

  double operator()(double t) {
    if (!(t > 0.0)) return 0.0;
    double full = 0.0;
    double s_lo = 0.0;
    if (t > d_) {
      // spheres of radius s <= t - d lie entirely inside the ball
      full = unit_sphere_area(params_.n) * cum_(t - d_);
      s_lo = t - d_;
    } else {
      s_lo = d_ - t;
    }
    const double s_hi = d_ + t;
    const double lo = std::max(s_lo, 1e-12 * s_hi);
    auto f = [&](double s) {
      const double u = u_fn_.value(s);
      if (!(u > 0.0)) return 0.0;
      return std::pow(u, params_.p) * sphere_cap_area(params_.n, s, d_, t);
    };
    // log panels: the integrand can be steep near the inner edge when it
    // sits many decades below the outer one
    double cap = integrate_log_panels(f, lo, s_hi, quad_);
    return full + cap;
  }

 private:
  const RadialFunction& u_fn_;
  const Params& params_;
  double d_;
  QuadratureSpec quad_;
  CumulativeSource cum_;
};

}  // namespace

double wolff_potential_radial(const RadialFunction& u_fn, const Params& params,
                              double x_radius, const QuadratureSpec& quad) {
  if (!(x_radius > 0.0))
    throw std::domain_error("wolff_potential_radial: x_radius must be positive");
  const double d = x_radius;
  const double n = params.n, k = params.k;
  BallMass mass(u_fn, params, d, quad);
  QuadratureSpec outer = quad;
  outer.edge_refine = false;  // smooth integrand; every panel costs a mass()
  outer.min_panels = std::min(quad.min_panels, 12);

  auto g = [&](double t) {
    const double m = mass(t);
    if (!(m > 0.0)) return 0.0;
    return std::pow(std::pow(t, 2.0 * k - n) * m, 1.0 / k);
  };
  // W = int g(t) dt/t
  auto integrand = [&](double t) { return g(t) / t; };

  const double t_lo = 1e-6 * d;
  double W = 0.0;
  // below t_lo the integrand scales like t^2: closed-form remainder
  W += g(t_lo) / 2.0;
  W += integrate_log_panels(integrand, t_lo, 0.5 * d, outer);
  W += integrate_log_panels(integrand, 0.5 * d, d, outer);
  W += integrate_log_panels(integrand, d, 2.0 * d, outer);
  if (!(W > 0.0)) return 0.0;  // u vanishes identically on the sampled range

  // extend outward by decades until the power-law tail estimate is small
  double lo = 2.0 * d;
  bool closed = false;
  for (int dec = 0; dec < 60 && !closed; ++dec) {
    const double hi = lo * 10.0;
    W += integrate_log_panels(integrand, lo, hi, outer);
    const double g_hi = g(hi);
    if (!(g_hi > 0.0)) {
      closed = true;  // source exhausted (compactly supported u)
      break;
    }
    const double step = 1.2589254117941673;  // one tenth of a decade
    const double slope = -std::log(g(hi * step) / g_hi) / std::log(step);
    if (slope > 0.05 && g_hi / slope < 1e-7 * W) {
      W += g_hi / slope;  // int_T^inf g dt/t for g ~ t^{-slope}
      closed = true;
    }
    lo = hi;
  }
  if (!closed)
    throw QuadratureError("wolff_potential_radial: outer integral did not decay", 1.0);
  return W;
}

WolffResult wolff_bound_check(const RadialProfile& profile, std::span<const double> radii,
                              const QuadratureSpec& quad) {
  WolffResult out;
  out.u_inf = profile.u.back();

  PowerLawTail tail{};
  bool extend = false;
  if (profile.termination != Termination::ZeroCrossing) {
    const DecayFit fit = fit_decay_tail(profile, 2.0);
    tail.coefficient = fit.coefficient;
    tail.exponent = fit.exponent;
    extend = true;
  }
  const ProfileFunction fn =
      extend ? ProfileFunction(profile, tail) : ProfileFunction(profile);
  out.tail_extended = extend;
  out.tail = tail;

  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  for (double d : radii) {
    const double W = wolff_potential_radial(fn, profile.params, d, quad);
    const double u = fn.value(d);
    out.radii.push_back(d);
    out.W.push_back(W);
    out.u.push_back(u);
    lower = std::min(lower, u / W);
    upper = std::max(upper, u / (out.u_inf + W));
  }
  out.lower_ratio = lower;
  out.upper_ratio = upper;
  return out;
}

}  // namespace khess
