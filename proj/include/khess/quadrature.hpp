#ifndef KHESS_QUADRATURE_HPP
#define KHESS_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "khess/errors.hpp"

namespace khess {

struct QuadratureSpec {
  int gl_order = 16;           // Gauss-Legendre points per panel
  int panels_per_decade = 8;   // composite panels per decade of r
  double graded_r_min = 1e-10; // geometric panels reach down to this radius
  int min_panels = 32;         // panel floor for narrow ranges
  // geometric subdivision of the outermost panels; resolves integrands
  // that flatten or vanish steeply at the interval ends (bump edges)
  bool edge_refine = true;
};

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
// Newton iteration on the Legendre recurrence.
class GaussLegendre {
 public:
  explicit GaussLegendre(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      sum += weights_[i] * f(mid + half * nodes_[i]);
    return sum * half;
  }

  static const GaussLegendre& cached(int order);

 private:
  std::vector<double> nodes_, weights_;
};

// Composite rule over [a, b] with log-uniform panels; requires 0 < a < b.
template <class F>
double integrate_log_panels(F&& f, double a, double b, const QuadratureSpec& spec) {
  if (!(a > 0.0) || !(b > a)) throw std::domain_error("integrate_log_panels: need 0 < a < b");
  const GaussLegendre& gl = GaussLegendre::cached(spec.gl_order);
  const double decades = std::log10(b / a);
  const int panels =
      std::max(std::max(spec.edge_refine ? 2 : 1, spec.min_panels),
               static_cast<int>(std::ceil(decades * spec.panels_per_decade)));
  double sum = 0.0;
  for (int i = 1; i <= panels; ++i) {
    const double lo = a * std::pow(b / a, static_cast<double>(i - 1) / panels);
    const double hi = (i == panels) ? b : a * std::pow(b / a, static_cast<double>(i) / panels);
    if (spec.edge_refine && (i == 1 || i == panels)) {
      // split the outermost panels geometrically toward the endpoint
      constexpr int levels = 24;
      if (i == 1) {
        double right = hi;
        for (int j = 1; j < levels; ++j) {
          const double left = lo + (hi - lo) * std::ldexp(1.0, -j);
          sum += gl.integrate(f, left, right);
          right = left;
        }
        sum += gl.integrate(f, lo, right);
      } else {
        double left = lo;
        for (int j = 1; j < levels; ++j) {
          const double right = hi - (hi - lo) * std::ldexp(1.0, -j);
          sum += gl.integrate(f, left, right);
          left = right;
        }
        sum += gl.integrate(f, left, hi);
      }
    } else {
      sum += gl.integrate(f, lo, hi);
    }
  }
  return sum;
}

// Integral over (a, b] with geometric grading toward 0: when a falls at or
// below spec.graded_r_min the panels start there instead (the integrands
// used here are integrable at the origin and the remainder is negligible).
template <class F>
double integrate_graded(F&& f, double a, double b, const QuadratureSpec& spec) {
  const double lo = std::max(a, std::min(spec.graded_r_min, 1e-4 * b));
  if (!(b > lo)) return 0.0;
  return integrate_log_panels(f, lo, b, spec);
}

// Adaptive bisection with a GL(order) vs 2xGL(order) error estimate.
// Throws QuadratureError (with the achieved estimate) past max_depth.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol,
                          double abs_tol = 0.0, int gl_order = 16, int max_depth = 32) {
  const GaussLegendre& gl = GaussLegendre::cached(gl_order);
  struct Rec {
    const GaussLegendre& gl;
    double rel_tol, abs_tol;
    int max_depth;
    double run(F& f, double a, double b, double coarse, int depth) const {
      const double mid = 0.5 * (a + b);
      const double left = gl.integrate(f, a, mid);
      const double right = gl.integrate(f, mid, b);
      const double fine = left + right;
      const double err = std::fabs(fine - coarse);
      if (err <= rel_tol * std::fabs(fine) + abs_tol) return fine;
      if (depth >= max_depth)
        throw QuadratureError("integrate_adaptive: max depth reached",
                              err / std::max(std::fabs(fine), 1e-300));
      return run(f, a, mid, left, depth + 1) + run(f, mid, b, right, depth + 1);
    }
  };
  Rec rec{gl, rel_tol, abs_tol, max_depth};
  return rec.run(f, a, b, gl.integrate(f, a, b), 0);
}

}  // namespace khess

#endif
