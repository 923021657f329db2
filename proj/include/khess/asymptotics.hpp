#ifndef KHESS_ASYMPTOTICS_HPP
#define KHESS_ASYMPTOTICS_HPP

#include <span>
#include <vector>

#include "khess/params.hpp"
#include "khess/quadrature.hpp"
#include "khess/radial_fn.hpp"
#include "khess/solver.hpp"

namespace khess {

struct DecayFit {
  double exponent = 0.0;     // fitted slope of ln u vs ln r
  double coefficient = 0.0;  // exp(intercept)
  double r_lo = 0.0, r_hi = 0.0;
  double rms_residual = 0.0;
  int points = 0;
};

// Least-squares line through (ln r, ln u) over the samples inside the
// window. Throws std::invalid_argument with fewer than 10 points.
DecayFit fit_power_law(std::span<const double> r, std::span<const double> u,
                       double r_lo, double r_hi);

DecayFit fit_decay(const RadialProfile& profile, double r_lo, double r_hi);

// Window = last `decades` decades before the end of the grid.
DecayFit fit_decay_tail(const RadialProfile& profile, double decades = 2.0);

struct LimitCoefficient {
  double B_estimate = 0.0;  // median of u r^{2k/(p-k)} over the last decade
  double A_target = 0.0;    // singular coefficient A
  bool converged = false;   // |B/A - 1| <= tolerance
  double tolerance = 0.05;
  double oscillation = 0.0;  // (max - min)/median of u r^theta on the window
};

// Requires p > p_so and ReachedRmax termination (NotApplicableError else).
LimitCoefficient limit_coefficient_B(const RadialProfile& profile, double tolerance = 0.05);

// Number of sign changes of f - g over a log-uniform sample grid on
// [r_lo, r_hi], each bracketed crossing refined by bisection to 1e-8
// relative radius tolerance. Tangential touches (no sign change) do not
// count.
int intersection_count(const RadialFunction& f, const RadialFunction& g, double r_lo,
                       double r_hi, int samples);

// Surface measure |S^{dim-1}| of the unit sphere in R^dim.
double unit_sphere_area(int dim);

// int_0^theta sin^m(x) dx by adaptive Gauss quadrature.
double sin_power_integral(int m, double theta, double rel_tol = 1e-12);

// (n-1)-measure of the sphere {|y| = s} intersected with the ball B_t(x),
// |x| = d: zero when |s - d| >= t, the full sphere when s + d <= t, and the
// spherical cap with cos(theta*) = (s^2 + d^2 - t^2)/(2 s d) in between.
double sphere_cap_area(int n, double s, double d, double t);

// Wolff potential W_{2k/(k+1), k+1}(u^p) at |x| = x_radius:
//   W = int_0^inf ( t^{2k-n} int_{B_t(x)} u^p dy )^{1/k} dt/t,
// reduced to nested 1-D quadratures; the outer integral is split at
// t = d/2, d, 2d, log-substituted, truncated when the integrand falls
// below tolerance, and closed with a power-law tail estimate.
double wolff_potential_radial(const RadialFunction& u_fn, const Params& params,
                              double x_radius, const QuadratureSpec& quad = {});

struct WolffResult {
  std::vector<double> radii;
  std::vector<double> W;
  std::vector<double> u;
  double lower_ratio = 0.0;  // min over radii of u/W
  double upper_ratio = 0.0;  // max over radii of u/(u_inf + W)
  double u_inf = 0.0;        // u at the last grid node
  bool tail_extended = false;
  PowerLawTail tail{};
};

// Evaluates the two-sided Wolff bound along the given radii. Profiles that
// reached r_max are extended by the power law fitted over the last two
// decades (flagged in the result).
WolffResult wolff_bound_check(const RadialProfile& profile, std::span<const double> radii,
                              const QuadratureSpec& quad = {});

}  // namespace khess

#endif
