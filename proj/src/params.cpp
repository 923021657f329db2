#include "khess/params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace khess {

double binomial_coeff(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("binomial_coeff: need 0 <= k <= n");
  if (k > n - k) k = n - k;
  unsigned long long c = 1;
  for (int i = 1; i <= k; ++i) {
    unsigned long long num = static_cast<unsigned long long>(n - k + i);
    // C(n-k+i, i) = C(n-k+i-1, i-1) * (n-k+i) / i stays integral at each step
    if (c > std::numeric_limits<unsigned long long>::max() / num)
      throw std::domain_error("binomial_coeff: 64-bit overflow");
    c = c * num / static_cast<unsigned long long>(i);
  }
  return static_cast<double>(c);
}

void validate_dimension_order(int n, int k) {
  if (k < 2) throw std::domain_error("params: Hessian order k must be >= 2");
  if (n < 3) throw std::domain_error("params: dimension n must be >= 3");
  if (n <= 2 * k)
    throw std::domain_error("params: need 2k < n (got n=" + std::to_string(n) +
                            ", k=" + std::to_string(k) + ")");
}

double Params::serrin() const {
  return static_cast<double>(n) * k / (n - 2.0 * k);
}

Params Params::make(int n, int k, double p) {
  validate_dimension_order(n, k);
  Params prm;
  prm.n = n;
  prm.k = k;
  prm.p = p;
  prm.binom = binomial_coeff(n - 1, k - 1);
  if (!(p > prm.serrin()))
    throw std::domain_error("params: p=" + std::to_string(p) +
                            " must exceed the Serrin exponent " +
                            std::to_string(prm.serrin()));
  return prm;
}

bool ExponentSet::jl_finite() const { return std::isfinite(p_jl); }

ExponentSet compute_exponents(int n, int k) {
  validate_dimension_order(n, k);
  const double nd = n, kd = k;
  ExponentSet e;
  e.p_se = nd * kd / (nd - 2 * kd);
  e.p_so = (nd + 2) * kd / (nd - 2 * kd);
  e.p_star = kd * (nd + 2 * kd) / (nd - 2 * kd);
  if (n <= 2 * k + 8) {
    e.p_jl = std::numeric_limits<double>::infinity();
  } else {
    const double num = kd * (nd * nd - 2 * (kd + 3) * nd + 4 * kd);
    const double disc = 4 * kd * std::sqrt(2 * (kd + 1) * nd - 4 * kd);
    const double den = (nd - 2 * kd) * (nd - 2 * kd - 8);
    e.p_jl = (num + disc) / den;
    e.p_2 = (num - disc) / den;
  }
  return e;
}

const char* to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::Subcritical: return "Subcritical";
    case RegimeTag::Critical: return "Critical";
    case RegimeTag::SupercriticalPreJL: return "SupercriticalPreJL";
    case RegimeTag::JLStable: return "JLStable";
  }
  return "?";
}

Regime classify_regime(const Params& params, double rel_tol) {
  const ExponentSet e = compute_exponents(params.n, params.k);
  const double p = params.p;
  if (!(p > e.p_se))
    throw std::domain_error("classify_regime: p must exceed the Serrin exponent");

  Regime reg;
  if (std::fabs(p - e.p_so) <= rel_tol * e.p_so) {
    reg.tag = RegimeTag::Critical;
  } else if (p < e.p_so) {
    reg.tag = RegimeTag::Subcritical;
  } else if (e.jl_finite() && p >= e.p_jl * (1.0 - rel_tol)) {
    reg.tag = RegimeTag::JLStable;
  } else {
    reg.tag = RegimeTag::SupercriticalPreJL;
  }
  reg.ge_p_star = p >= e.p_star * (1.0 - rel_tol);
  reg.le_p2 = e.p_2.has_value() && p <= *e.p_2 * (1.0 + rel_tol);
  return reg;
}

double jl_quadratic_residual(int n, int k, double p) {
  validate_dimension_order(n, k);
  if (n < 2 * k + 9)
    throw std::domain_error("jl_quadratic_residual: quadratic degenerate for n < 2k+9");
  const double nd = n, kd = k;
  return (nd - 2 * kd) * (nd - 2 * kd - 8) * p * p -
         2 * kd * (nd * nd - 2 * (kd + 3) * nd + 4 * kd) * p +
         kd * kd * (nd - 2) * (nd - 2);
}

double f_function(int n, int k, double t) {
  validate_dimension_order(n, k);
  const double kd = k;
  if (!(t > kd)) throw std::domain_error("f_function: need t > k");
  const double gamma = (2 * t + 2 * std::sqrt(t * (t - kd)) - kd) / kd;
  return ((2 * kd + 1) * (t + gamma) - (gamma + kd)) / (t - kd);
}

StabilityCondition stability_condition_315(const Params& params) {
  const double nd = params.n, kd = params.k, p = params.p;
  StabilityCondition c;
  c.lhs = p * (2.0 / (p - kd)) * (nd - 2 * p * kd / (p - kd));
  const double b = nd - 2 - 2 * p * (kd - 1) / (p - kd);
  c.rhs = b * b / 4.0;
  c.holds = c.lhs <= c.rhs;
  return c;
}

}  // namespace khess
