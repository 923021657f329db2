#ifndef KHESS_PARAMS_HPP
#define KHESS_PARAMS_HPP

#include <optional>

namespace khess {

// Exact binomial coefficient C(n, k) in integer arithmetic, converted to
// double. Throws std::domain_error on invalid input or 64-bit overflow.
double binomial_coeff(int n, int k);

// Parameter triple (n, k, p) of the radial k-Hessian problem
//
//   -(1/k) C(n-1,k-1) (r^{n-k} |u'|^{k-1} u')' = r^{n-1} u^p,
//
// with n >= 3, 2 <= k, 2k < n and p above the Serrin exponent nk/(n-2k).
struct Params {
  int n = 0;
  int k = 0;
  double p = 0.0;
  double binom = 0.0;  // C(n-1, k-1)

  // Validates all invariants (including p > p_se) and fills binom.
  static Params make(int n, int k, double p);

  // Decay exponent of the singular solution, theta = 2k/(p-k).
  double theta() const { return 2.0 * k / (p - k); }
  // Serrin exponent nk/(n-2k), the standing lower bound on p.
  double serrin() const;
};

// Validates (n, k) only; throws std::domain_error unless n >= 3, k >= 2,
// 2k < n.
void validate_dimension_order(int n, int k);

struct ExponentSet {
  double p_se = 0.0;    // Serrin, nk/(n-2k)
  double p_so = 0.0;    // Sobolev, (n+2)k/(n-2k)
  double p_star = 0.0;  // separation, k(n+2k)/(n-2k)
  double p_jl = 0.0;    // Joseph-Lundgren; +infinity iff n <= 2k+8
  std::optional<double> p_2;  // smaller root of the stability quadratic,
                              // defined only when n >= 2k+9

  bool jl_finite() const;
};

ExponentSet compute_exponents(int n, int k);

enum class RegimeTag { Subcritical, Critical, SupercriticalPreJL, JLStable };
const char* to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag = RegimeTag::Subcritical;
  bool ge_p_star = false;  // p >= p_star
  bool le_p2 = false;      // p <= p_2 (false when p_2 undefined)
};

// Classifies p > p_se against the critical exponents. Equality with p_so
// and p_jl is detected within a relative tolerance.
Regime classify_regime(const Params& params, double rel_tol = 1e-12);

// Value of the stability quadratic
//   (n-2k)(n-2k-8) p^2 - 2k[n^2 - 2(k+3)n + 4k] p + k^2 (n-2)^2,
// which vanishes at p_jl and p_2. Requires n >= 2k+9.
double jl_quadratic_residual(int n, int k, double p);

// f(t) = [(2k+1)(t + g(t)) - (g(t) + k)]/(t - k) with
// g(t) = (2t + 2 sqrt(t(t-k)) - k)/k; strictly decreasing on (k, inf)
// with limit 2k+9, and f(p_jl) = n+1 when n >= 2k+9.
double f_function(int n, int k, double t);

struct StabilityCondition {
  double lhs = 0.0;  // p (2/(p-k)) (n - 2pk/(p-k))
  double rhs = 0.0;  // (n - 2 - 2p(k-1)/(p-k))^2 / 4
  bool holds = false;  // lhs <= rhs
};

// Hardy-constant comparison deciding stability of the singular solution;
// holds exactly on p <= p_2 or p >= p_jl whenever n >= 2k+9.
StabilityCondition stability_condition_315(const Params& params);

}  // namespace khess

#endif
