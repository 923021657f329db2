#ifndef KHESS_CLOSED_FORMS_HPP
#define KHESS_CLOSED_FORMS_HPP

#include "khess/params.hpp"
#include "khess/radial_fn.hpp"

namespace khess {

// Prefactor A of the singular solution u_s(r) = A r^{-2k/(p-k)}:
//   A = ((1/k) C(n-1,k-1))^{1/(p-k)} (2k/(p-k))^{k/(p-k)} (n - 2pk/(p-k))^{1/(p-k)}.
double singular_coefficient_A(const Params& params);

enum class FormKind { Singular, CriticalRegular };

// Analytic solutions of the radial equation: the singular power law u_s,
// and (at p = p_so only) the explicit regular family. The family parameter
// rho here is the one from the explicit formula; the corresponding center
// value is u(0) = ((1/k) C(n-1,k-1))^{1/(p-k)} * rho, exposed separately to
// avoid mixing the two normalizations.
class ClosedForm final : public RadialFunction {
 public:
  static ClosedForm singular(const Params& params);
  static ClosedForm critical_regular(const Params& params, double family_rho);

  double value(double r) const override;
  double deriv(double r) const override;
  bool has_second_deriv() const override { return true; }
  double second_deriv(double r) const override;

  FormKind kind() const { return kind_; }
  const Params& params() const { return params_; }
  double coefficient_A() const;  // Singular only
  double family_rho() const;     // CriticalRegular only
  double center_value() const;   // CriticalRegular only: u(0)

 private:
  ClosedForm(FormKind kind, const Params& params);

  FormKind kind_;
  Params params_;
  double coeff_A_ = 0.0;   // Singular
  double rho_ = 0.0;       // CriticalRegular family parameter
  double amplitude_ = 0.0; // CriticalRegular: u(0)
  double q_ = 0.0;         // CriticalRegular: coefficient of r^2 inside (...)
  double m_ = 0.0;         // CriticalRegular: outer exponent (n-2k)/(2k)
};

// Residual of the radial equation at r for any function with a first (and
// optionally second) derivative:
//   -(1/k) C(n-1,k-1) d/dr [ r^{n-k} |u'|^{k-1} u' ] - r^{n-1} u(r)^p.
// Without a second derivative the outer derivative is taken by 5-point
// central differences with step max(1e-6, 1e-6 r); throws NotApplicableError
// if u' changes sign on the stencil.
double ode_residual(const RadialFunction& fn, const Params& params, double r);

}  // namespace khess

#endif
