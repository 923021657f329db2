#ifndef KHESS_VARIATIONAL_HPP
#define KHESS_VARIATIONAL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khess/params.hpp"
#include "khess/quadrature.hpp"
#include "khess/radial_fn.hpp"
#include "khess/solver.hpp"
#include "khess/test_functions.hpp"

namespace khess {

struct EnergyResult {
  double J = 0.0;
  double gradient_term = 0.0;   // (C/(k(k+1))) int |u'|^{k+1} r^{n-k} dr
  double potential_term = 0.0;  // (1/(p+1)) int u^{p+1} r^{n-1} dr
  double r_min = 0.0, r_max = 0.0;
};

EnergyResult energy_J_terms(const RadialFunction& u, const Params& params, double r_max,
                            const QuadratureSpec& quad = {}, double r_min = 0.0);
double energy_J(const RadialFunction& u, const Params& params, double r_max,
                const QuadratureSpec& quad = {}, double r_min = 0.0);

struct WeakFormResult {
  double gradient_integral = 0.0;  // (1/k) C int r^{n-k} |u'|^{k-1} u' phi' dr
  double source_integral = 0.0;    // int r^{n-1} u^p phi dr
  double residual() const { return gradient_integral - source_integral; }
  double scale() const;
};

// First-variation residual; near zero when u solves the radial equation on
// the support of phi.
WeakFormResult weak_form_terms(const RadialFunction& u, const Params& params,
                               const TestFunction& phi, const QuadratureSpec& quad = {});
double weak_form_residual(const RadialFunction& u, const Params& params,
                          const TestFunction& phi, const QuadratureSpec& quad = {});

struct QTerms {
  double gradient_term = 0.0;   // C int r^{n-k} |u'|^{k-1} (phi')^2 dr
  double potential_term = 0.0;  // p int r^{n-1} u^{p-1} phi^2 dr
  double Q() const { return gradient_term - potential_term; }
  double scale() const;
  // potential-weighted norm int r^{n-1} u^{p-1} phi^2 dr
  double norm_sq(double p) const { return potential_term / p; }
};

// Second-variation quadratic form Q_u(phi).
QTerms stability_Q_terms(const RadialFunction& u, const Params& params,
                         const TestFunction& phi, const QuadratureSpec& quad = {});
double stability_Q(const RadialFunction& u, const Params& params, const TestFunction& phi,
                   const QuadratureSpec& quad = {});

struct PohozaevGap {
  double R = 0.0;  // radius actually used (profiles snap to the nearest node)
  double lhs = 0.0, rhs = 0.0;
  double relative_gap = 0.0;
};

// Pohozaev identity at finite radius R:
//   -((n-2k)/(k+1)) int_0^R r^{n-k} |u'|^{k+1} dr
//     + (k/C)(n/(p+1)) int_0^R r^{n-1} u^{p+1} dr
//   = (k/(k+1)) R^{n-k+1} |u'(R)|^{k+1} + (k/((p+1)C)) R^n u^{p+1}(R).
// The profile overload uses the integrals accumulated during the solve.
PohozaevGap pohozaev_residual(const RadialProfile& profile, double R);
PohozaevGap pohozaev_residual(const RadialFunction& u, const Params& params, double R,
                              const QuadratureSpec& quad = {});

struct EnergyIdentityEntry {
  double R = 0.0;
  double lhs_with_boundary = 0.0;  // int_0^R r^{n-k}|u'|^{k+1} dr + boundary
  double rhs = 0.0;                // (k/C) int_0^R r^{n-1} u^{p+1} dr
  double boundary_term = 0.0;      // R^{n-k} u(R) |u'(R)|^k
  double gap_rel = 0.0;
};

// Truncated energy identity; defined only at p = p_so, where both global
// integrals converge (NotApplicableError otherwise).
std::vector<EnergyIdentityEntry> energy_identity_residual(
    const RadialFunction& u, const Params& params, std::span<const double> R_values,
    const QuadratureSpec& quad = {});
std::vector<EnergyIdentityEntry> energy_identity_residual(const RadialProfile& profile,
                                                          std::span<const double> R_values);

// Best constant (n-2-2a)^2/4 of the weighted Hardy inequality with b = a+1;
// requires 0 <= a <= (n-2)/2.
double ckn_best_constant(int n, double a);

struct QSweepEntry {
  std::string family;
  double param1 = 0.0, param2 = 0.0;
  double Q = 0.0;
  double normalized_Q = 0.0;  // Q / int r^{n-1} u^{p-1} phi^2 dr
  double scale = 0.0;         // |gradient term| + |potential term|
};

// Mixed family of annular bumps and Hardy cutoffs with supports spanning
// [r_lo, r_hi], for Q sweeps over a candidate solution.
std::vector<TestFunction> make_q_family(const Params& params, int annular_count,
                                        int hardy_count, double r_lo, double r_hi);

std::vector<QSweepEntry> q_sweep(const RadialFunction& u, const Params& params,
                                 std::span<const TestFunction> family,
                                 const QuadratureSpec& quad = {});

struct WitnessSearchResult {
  double best_Q_normalized = 0.0;
  std::optional<TestFunction> witness;
  bool found_negative = false;
  std::vector<std::pair<double, double>> eps_table;  // (eps, normalized Q)
};

// Minimizes Q/||phi||^2 over the Hardy-cutoff family with exponent
// a = p(k-1)/(p-k), sweeping the support parameter over eps_grid and
// refining the best bracket by golden section. A strictly negative
// minimum certifies instability. Requires n >= 2k+9 and p > p_2.
WitnessSearchResult instability_witness_search(const Params& params,
                                               const RadialFunction& u_fn,
                                               std::span<const double> eps_grid,
                                               const QuadratureSpec& quad = {});

struct TailStabilityReport {
  double R_requested = 0.0;
  double r_max = 0.0;
  int family_size = 0;
  double min_Q = 0.0;
  double min_normalized_Q = 0.0;
  bool all_nonnegative = false;  // over the family supported in (R, r_max)
  double stability_radius = 0.0; // smallest ladder R with all Q nonnegative
  std::vector<QSweepEntry> entries;  // the family at R_requested
};

// Samples Q over annular bumps supported in (R, r_max) and walks a ladder
// of larger radii to locate the empirical radius beyond which all sampled
// Q are nonnegative.
TailStabilityReport tail_stability_check(const RadialFunction& u, const Params& params,
                                         double R, int family_size, double r_max = 1e6,
                                         const QuadratureSpec& quad = {});

}  // namespace khess

#endif
