#include "khess/closed_forms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "khess/errors.hpp"

namespace khess {
namespace {

// Fractional power with an explicit positivity guard; bases can approach
// zero as p -> p_se from above.
double guarded_pow(double base, double expo, const char* what) {
  if (!(base > 0.0))
    throw std::domain_error(std::string(what) + ": nonpositive base " + std::to_string(base));
  return std::exp(expo * std::log(base));
}

}  // namespace

double singular_coefficient_A(const Params& params) {
  const double n = params.n, k = params.k, p = params.p;
  const double inv_pk = 1.0 / (p - k);
  const double base3 = n - 2.0 * p * k / (p - k);
  return guarded_pow(params.binom / k, inv_pk, "singular_coefficient_A") *
         guarded_pow(2.0 * k / (p - k), k * inv_pk, "singular_coefficient_A") *
         guarded_pow(base3, inv_pk, "singular_coefficient_A");
}

ClosedForm::ClosedForm(FormKind kind, const Params& params)
    : kind_(kind), params_(params) {}

ClosedForm ClosedForm::singular(const Params& params) {
  ClosedForm cf(FormKind::Singular, params);
  cf.coeff_A_ = singular_coefficient_A(params);
  return cf;
}

ClosedForm ClosedForm::critical_regular(const Params& params, double family_rho) {
  const ExponentSet e = compute_exponents(params.n, params.k);
  if (std::fabs(params.p - e.p_so) > 1e-12 * e.p_so)
    throw std::domain_error("ClosedForm::critical_regular: requires p = p_so");
  if (!(family_rho > 0.0))
    throw std::domain_error("ClosedForm::critical_regular: rho must be positive");

  const double n = params.n, k = params.k, p = params.p;
  ClosedForm cf(FormKind::CriticalRegular, params);
  cf.rho_ = family_rho;
  cf.amplitude_ = guarded_pow(params.binom / k, 1.0 / (p - k), "critical_regular") * family_rho;
  const double beta = k / (std::pow(n, 1.0 / k) * (n - 2.0 * k));
  const double scale = std::pow(family_rho, (k + 1.0) / (n - 2.0 * k));
  cf.q_ = beta * scale * scale;
  cf.m_ = (n - 2.0 * k) / (2.0 * k);
  return cf;
}

double ClosedForm::value(double r) const {
  if (kind_ == FormKind::Singular) {
    if (!(r > 0.0)) throw std::domain_error("singular form: r must be positive");
    return coeff_A_ * std::pow(r, -params_.theta());
  }
  if (r < 0.0) throw std::domain_error("closed form: r must be nonnegative");
  return amplitude_ * std::pow(1.0 + q_ * r * r, -m_);
}

double ClosedForm::deriv(double r) const {
  if (kind_ == FormKind::Singular) {
    if (!(r > 0.0)) throw std::domain_error("singular form: r must be positive");
    const double theta = params_.theta();
    return -coeff_A_ * theta * std::pow(r, -theta - 1.0);
  }
  if (r < 0.0) throw std::domain_error("closed form: r must be nonnegative");
  return amplitude_ * (-2.0 * m_ * q_ * r) * std::pow(1.0 + q_ * r * r, -m_ - 1.0);
}

double ClosedForm::second_deriv(double r) const {
  if (kind_ == FormKind::Singular) {
    if (!(r > 0.0)) throw std::domain_error("singular form: r must be positive");
    const double theta = params_.theta();
    return coeff_A_ * theta * (theta + 1.0) * std::pow(r, -theta - 2.0);
  }
  if (r < 0.0) throw std::domain_error("closed form: r must be nonnegative");
  const double w = 1.0 + q_ * r * r;
  return amplitude_ * (-2.0 * m_ * q_) * std::pow(w, -m_ - 2.0) *
         (w - 2.0 * (m_ + 1.0) * q_ * r * r);
}

double ClosedForm::coefficient_A() const {
  if (kind_ != FormKind::Singular)
    throw std::logic_error("coefficient_A: not a singular form");
  return coeff_A_;
}

double ClosedForm::family_rho() const {
  if (kind_ != FormKind::CriticalRegular)
    throw std::logic_error("family_rho: not a critical regular form");
  return rho_;
}

double ClosedForm::center_value() const {
  if (kind_ != FormKind::CriticalRegular)
    throw std::logic_error("center_value: not a critical regular form");
  return amplitude_;
}

namespace {

// r^{n-k} |u'|^{k-1} u' for a nonincreasing positive function
// (= -r^{n-k} (-u')^k; zero where u' = 0).
double flux(const RadialFunction& fn, const Params& params, double r) {
  const double du = fn.deriv(r);
  const double mdu = -du;
  if (mdu < 0.0)
    throw NotApplicableError("ode_residual: u' changes sign near r");
  if (mdu == 0.0) return 0.0;
  return -std::pow(r, static_cast<double>(params.n - params.k)) *
         std::pow(mdu, static_cast<double>(params.k));
}

}  // namespace

double ode_residual(const RadialFunction& fn, const Params& params, double r) {
  if (!(r > 0.0)) throw std::domain_error("ode_residual: r must be positive");
  const double n = params.n, k = params.k, p = params.p;
  const double u = fn.value(r);
  const double source = std::pow(r, n - 1.0) * std::pow(u, p);

  double dflux;
  if (fn.has_second_deriv()) {
    const double du = fn.deriv(r);
    const double mdu = -du;
    if (mdu < 0.0)
      throw NotApplicableError("ode_residual: u' must be nonpositive at r");
    if (mdu == 0.0) {
      dflux = 0.0;  // both expanded terms carry a factor (-u')^{k-1}, k >= 2
    } else {
      const double d2u = fn.second_deriv(r);
      // d/dr [ -r^{n-k} (-u')^k ] expanded analytically
      dflux = -(n - k) * std::pow(r, n - k - 1.0) * std::pow(mdu, k) +
              k * std::pow(r, n - k) * std::pow(mdu, k - 1.0) * d2u;
    }
  } else {
    const double h = std::max(1e-6, 1e-6 * r);
    const double pts[4] = {r - 2 * h, r - h, r + h, r + 2 * h};
    double g[4];
    for (int i = 0; i < 4; ++i) g[i] = flux(fn, params, pts[i]);
    dflux = (g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h);
  }
  return -(params.binom / k) * dflux - source;
}

}  // namespace khess
