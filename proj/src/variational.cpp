#include "khess/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "khess/errors.hpp"

namespace khess {
namespace {

double rel_gap(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
}

// |u'|^{k+1} at r for a decreasing u
double grad_pow(const RadialFunction& u, double k_plus_1, double r) {
  const double mdu = -u.deriv(r);
  return mdu > 0.0 ? std::pow(mdu, k_plus_1) : 0.0;
}

}  // namespace

EnergyResult energy_J_terms(const RadialFunction& u, const Params& params, double r_max,
                            const QuadratureSpec& quad, double r_min) {
  const double n = params.n, k = params.k, p = params.p;
  EnergyResult res;
  res.r_min = r_min;
  res.r_max = r_max;
  res.gradient_term =
      params.binom / (k * (k + 1.0)) *
      integrate_graded([&](double r) { return std::pow(r, n - k) * grad_pow(u, k + 1.0, r); },
                       r_min, r_max, quad);
  res.potential_term =
      1.0 / (p + 1.0) *
      integrate_graded(
          [&](double r) {
            const double uv = u.value(r);
            return uv > 0.0 ? std::pow(r, n - 1.0) * std::pow(uv, p + 1.0) : 0.0;
          },
          r_min, r_max, quad);
  res.J = res.gradient_term - res.potential_term;
  return res;
}

double energy_J(const RadialFunction& u, const Params& params, double r_max,
                const QuadratureSpec& quad, double r_min) {
  return energy_J_terms(u, params, r_max, quad, r_min).J;
}

double WeakFormResult::scale() const {
  return std::max(std::fabs(gradient_integral), std::fabs(source_integral));
}

WeakFormResult weak_form_terms(const RadialFunction& u, const Params& params,
                               const TestFunction& phi, const QuadratureSpec& quad) {
  const double n = params.n, k = params.k, p = params.p;
  const double lo = phi.support_lo(), hi = phi.support_hi();
  WeakFormResult res;
  res.gradient_integral = params.binom / k *
                          integrate_graded(
                              [&](double r) {
                                const double mdu = -u.deriv(r);
                                if (!(mdu > 0.0)) return 0.0;
                                // |u'|^{k-1} u' = -(-u')^k
                                return std::pow(r, n - k) * (-std::pow(mdu, k)) *
                                       phi.deriv(r);
                              },
                              lo, hi, quad);
  res.source_integral = integrate_graded(
      [&](double r) {
        const double uv = u.value(r);
        if (!(uv > 0.0)) return 0.0;
        return std::pow(r, n - 1.0) * std::pow(uv, p) * phi.value(r);
      },
      lo, hi, quad);
  return res;
}

double weak_form_residual(const RadialFunction& u, const Params& params,
                          const TestFunction& phi, const QuadratureSpec& quad) {
  return weak_form_terms(u, params, phi, quad).residual();
}

double QTerms::scale() const {
  return std::fabs(gradient_term) + std::fabs(potential_term);
}

QTerms stability_Q_terms(const RadialFunction& u, const Params& params,
                         const TestFunction& phi, const QuadratureSpec& quad) {
  const double n = params.n, k = params.k, p = params.p;
  const double lo = phi.support_lo(), hi = phi.support_hi();
  QTerms res;
  res.gradient_term = params.binom *
                      integrate_graded(
                          [&](double r) {
                            const double mdu = -u.deriv(r);
                            if (!(mdu > 0.0)) return 0.0;
                            const double dphi = phi.deriv(r);
                            return std::pow(r, n - k) * std::pow(mdu, k - 1.0) * dphi * dphi;
                          },
                          lo, hi, quad);
  res.potential_term = p * integrate_graded(
                               [&](double r) {
                                 const double uv = u.value(r);
                                 if (!(uv > 0.0)) return 0.0;
                                 const double ph = phi.value(r);
                                 return std::pow(r, n - 1.0) * std::pow(uv, p - 1.0) * ph * ph;
                               },
                               lo, hi, quad);
  return res;
}

double stability_Q(const RadialFunction& u, const Params& params, const TestFunction& phi,
                   const QuadratureSpec& quad) {
  return stability_Q_terms(u, params, phi, quad).Q();
}

namespace {

PohozaevGap pohozaev_from_pieces(const Params& params, double R, double uR, double duR,
                                 double I_grad, double I_pow) {
  const double n = params.n, k = params.k, p = params.p, C = params.binom;
  PohozaevGap gap;
  gap.R = R;
  gap.lhs = -(n - 2.0 * k) / (k + 1.0) * I_grad + (k / C) * (n / (p + 1.0)) * I_pow;
  const double mdu = std::max(-duR, 0.0);
  gap.rhs = k / (k + 1.0) * std::pow(R, n - k + 1.0) * std::pow(mdu, k + 1.0) +
            k / ((p + 1.0) * C) * std::pow(R, n) * std::pow(uR, p + 1.0);
  gap.relative_gap = rel_gap(gap.lhs, gap.rhs);
  return gap;
}

std::size_t nearest_node(const RadialProfile& profile, double R) {
  if (!(R > 0.0) || R > profile.r_last())
    throw std::out_of_range("profile radius outside grid");
  auto it = std::lower_bound(profile.grid.begin(), profile.grid.end(), R);
  std::size_t i = static_cast<std::size_t>(it - profile.grid.begin());
  if (i == profile.size()) return i - 1;
  if (i > 0 && R - profile.grid[i - 1] < profile.grid[i] - R) return i - 1;
  return i;
}

}  // namespace

PohozaevGap pohozaev_residual(const RadialProfile& profile, double R) {
  const std::size_t i = nearest_node(profile, R);
  if (profile.I_grad.size() == profile.size() && profile.I_pow.size() == profile.size())
    return pohozaev_from_pieces(profile.params, profile.grid[i], profile.u[i],
                                profile.du[i], profile.I_grad[i], profile.I_pow[i]);
  // profiles read back from CSV lack the accumulated integrals
  const ProfileFunction fn(profile);
  return pohozaev_residual(fn, profile.params, profile.grid[i]);
}

PohozaevGap pohozaev_residual(const RadialFunction& u, const Params& params, double R,
                              const QuadratureSpec& quad) {
  const double n = params.n, k = params.k, p = params.p;
  const double I_grad = integrate_graded(
      [&](double r) { return std::pow(r, n - k) * grad_pow(u, k + 1.0, r); }, 0.0, R, quad);
  const double I_pow = integrate_graded(
      [&](double r) {
        const double uv = u.value(r);
        return uv > 0.0 ? std::pow(r, n - 1.0) * std::pow(uv, p + 1.0) : 0.0;
      },
      0.0, R, quad);
  return pohozaev_from_pieces(params, R, u.value(R), u.deriv(R), I_grad, I_pow);
}

namespace {

void require_critical(const Params& params) {
  const ExponentSet e = compute_exponents(params.n, params.k);
  if (std::fabs(params.p - e.p_so) > 1e-12 * e.p_so)
    throw NotApplicableError(
        "energy_identity_residual: defined only at p = p_so (global integrals diverge "
        "otherwise)");
}

EnergyIdentityEntry energy_identity_entry(const Params& params, double R, double uR,
                                          double duR, double I_grad, double I_pow) {
  const double n = params.n, k = params.k, C = params.binom;
  EnergyIdentityEntry ent;
  ent.R = R;
  const double mdu = std::max(-duR, 0.0);
  ent.boundary_term = std::pow(R, n - k) * uR * std::pow(mdu, k);
  ent.lhs_with_boundary = I_grad + ent.boundary_term;
  ent.rhs = k / C * I_pow;
  ent.gap_rel = rel_gap(ent.lhs_with_boundary, ent.rhs);
  return ent;
}

}  // namespace

std::vector<EnergyIdentityEntry> energy_identity_residual(const RadialFunction& u,
                                                          const Params& params,
                                                          std::span<const double> R_values,
                                                          const QuadratureSpec& quad) {
  require_critical(params);
  const double n = params.n, k = params.k, p = params.p;
  std::vector<EnergyIdentityEntry> out;
  for (double R : R_values) {
    const double I_grad = integrate_graded(
        [&](double r) { return std::pow(r, n - k) * grad_pow(u, k + 1.0, r); }, 0.0, R,
        quad);
    const double I_pow = integrate_graded(
        [&](double r) {
          const double uv = u.value(r);
          return uv > 0.0 ? std::pow(r, n - 1.0) * std::pow(uv, p + 1.0) : 0.0;
        },
        0.0, R, quad);
    out.push_back(energy_identity_entry(params, R, u.value(R), u.deriv(R), I_grad, I_pow));
  }
  return out;
}

std::vector<EnergyIdentityEntry> energy_identity_residual(const RadialProfile& profile,
                                                          std::span<const double> R_values) {
  require_critical(profile.params);
  if (profile.I_grad.size() != profile.size() || profile.I_pow.size() != profile.size()) {
    const ProfileFunction fn(profile);
    std::vector<double> snapped;
    for (double R : R_values) snapped.push_back(profile.grid[nearest_node(profile, R)]);
    return energy_identity_residual(fn, profile.params, snapped);
  }
  std::vector<EnergyIdentityEntry> out;
  for (double R : R_values) {
    const std::size_t i = nearest_node(profile, R);
    out.push_back(energy_identity_entry(profile.params, profile.grid[i], profile.u[i],
                                        profile.du[i], profile.I_grad[i],
                                        profile.I_pow[i]));
  }
  return out;
}

double ckn_best_constant(int n, double a) {
  if (!(a >= 0.0) || !(a <= (n - 2.0) / 2.0))
    throw std::domain_error("ckn_best_constant: need 0 <= a <= (n-2)/2");
  const double b = n - 2.0 - 2.0 * a;
  return b * b / 4.0;
}

std::vector<TestFunction> make_q_family(const Params& params, int annular_count,
                                        int hardy_count, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > 64.0 * r_lo))
    throw std::invalid_argument("make_q_family: need r_hi > 64 r_lo");
  std::vector<TestFunction> family;
  family.reserve(annular_count + hardy_count);

  const double fracs[3] = {0.35, 0.65, 0.9};
  for (int i = 0; i < annular_count; ++i) {
    const double t = annular_count > 1 ? static_cast<double>(i) / (annular_count - 1) : 0.5;
    const double c = (4.0 * r_lo) * std::pow(r_hi / (8.0 * r_lo), t);
    const double w = fracs[i % 3] * std::min(c - r_lo, r_hi - c);
    family.push_back(TestFunction::annular_bump(c, w));
  }

  // Hardy cutoffs with log-symmetric supports of growing width inside
  // [r_lo, r_hi]
  const double a = params.p * (params.k - 1.0) / (params.p - params.k);
  const double mid = std::sqrt(r_lo * r_hi);
  const double half_max = 0.5 * std::log(r_hi / r_lo);
  for (int i = 0; i < hardy_count; ++i) {
    const double t = hardy_count > 1 ? static_cast<double>(i) / (hardy_count - 1) : 0.5;
    const double half = std::max(1.1, (0.25 + 0.75 * t) * half_max);
    const double lo = mid * std::exp(-half);
    const double hi = mid * std::exp(half);
    family.push_back(TestFunction::hardy_cutoff(params.n, a, lo, 1.0 / hi));
  }
  return family;
}

std::vector<QSweepEntry> q_sweep(const RadialFunction& u, const Params& params,
                                 std::span<const TestFunction> family,
                                 const QuadratureSpec& quad) {
  std::vector<QSweepEntry> out;
  out.reserve(family.size());
  for (const TestFunction& phi : family) {
    const QTerms t = stability_Q_terms(u, params, phi, quad);
    QSweepEntry e;
    e.family = to_string(phi.family());
    e.param1 = phi.param1();
    e.param2 = phi.param2();
    e.Q = t.Q();
    const double nsq = t.norm_sq(params.p);
    e.normalized_Q = nsq > 0.0 ? e.Q / nsq : 0.0;
    e.scale = t.scale();
    out.push_back(e);
  }
  return out;
}

WitnessSearchResult instability_witness_search(const Params& params,
                                               const RadialFunction& u_fn,
                                               std::span<const double> eps_grid,
                                               const QuadratureSpec& quad) {
  if (params.n < 2 * params.k + 9)
    throw std::domain_error("instability_witness_search: requires n >= 2k+9");
  const ExponentSet e = compute_exponents(params.n, params.k);
  if (!(params.p > *e.p_2))
    throw std::domain_error("instability_witness_search: requires p > p_2");
  if (eps_grid.empty())
    throw std::invalid_argument("instability_witness_search: empty eps grid");

  const double a = params.p * (params.k - 1.0) / (params.p - params.k);
  auto normalized_Q = [&](double eps) {
    const TestFunction phi = TestFunction::hardy_cutoff(params.n, a, eps, eps);
    const QTerms t = stability_Q_terms(u_fn, params, phi, quad);
    return t.Q() / t.norm_sq(params.p);
  };

  WitnessSearchResult res;
  std::vector<double> eps_sorted(eps_grid.begin(), eps_grid.end());
  std::sort(eps_sorted.begin(), eps_sorted.end());
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eps_sorted.size(); ++i) {
    const double qn = normalized_Q(eps_sorted[i]);
    res.eps_table.emplace_back(eps_sorted[i], qn);
    if (qn < best_val) {
      best_val = qn;
      best = i;
    }
  }

  // golden-section refinement on log(eps) inside the bracketing neighbors
  double lo = std::log(eps_sorted[best > 0 ? best - 1 : best]);
  double hi = std::log(eps_sorted[std::min(best + 1, eps_sorted.size() - 1)]);
  double best_eps = eps_sorted[best];
  if (hi > lo) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = normalized_Q(std::exp(x1)), f2 = normalized_Q(std::exp(x2));
    for (int it = 0; it < 32 && hi - lo > 1e-3; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = normalized_Q(std::exp(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = normalized_Q(std::exp(x2));
      }
    }
    const double xm = 0.5 * (lo + hi);
    const double fm = normalized_Q(std::exp(xm));
    if (fm < best_val) {
      best_val = fm;
      best_eps = std::exp(xm);
    }
  }

  res.best_Q_normalized = best_val;
  res.found_negative = best_val < 0.0;
  res.witness = TestFunction::hardy_cutoff(params.n, a, best_eps, best_eps);
  return res;
}

TailStabilityReport tail_stability_check(const RadialFunction& u, const Params& params,
                                         double R, int family_size, double r_max,
                                         const QuadratureSpec& quad) {
  if (!(R > 0.0) || !(r_max > 8.0 * R))
    throw std::invalid_argument("tail_stability_check: need 0 < R and r_max > 8R");
  if (family_size < 1) throw std::invalid_argument("tail_stability_check: empty family");

  auto sample = [&](double R_lo) {
    std::vector<TestFunction> family;
    const double fracs[3] = {0.35, 0.65, 0.9};
    for (int i = 0; i < family_size; ++i) {
      const double t = family_size > 1 ? static_cast<double>(i) / (family_size - 1) : 0.5;
      const double c = (2.0 * R_lo) * std::pow(r_max / (4.0 * R_lo), t);
      const double w = fracs[i % 3] * std::min(c - R_lo, r_max - c);
      family.push_back(TestFunction::annular_bump(c, w));
    }
    return q_sweep(u, params, family, quad);
  };

  TailStabilityReport rep;
  rep.R_requested = R;
  rep.r_max = r_max;
  rep.family_size = family_size;
  rep.entries = sample(R);

  rep.min_Q = std::numeric_limits<double>::infinity();
  rep.min_normalized_Q = std::numeric_limits<double>::infinity();
  bool all_nonneg = true;
  for (const QSweepEntry& e : rep.entries) {
    rep.min_Q = std::min(rep.min_Q, e.Q);
    rep.min_normalized_Q = std::min(rep.min_normalized_Q, e.normalized_Q);
    if (e.Q < -1e-10 * e.scale) all_nonneg = false;
  }
  rep.all_nonnegative = all_nonneg;

  // ladder search for the empirical stability radius
  rep.stability_radius = std::numeric_limits<double>::quiet_NaN();
  double R_c = R;
  while (r_max > 8.0 * R_c) {
    bool ok = true;
    for (const QSweepEntry& e : (R_c == R ? rep.entries : sample(R_c)))
      if (e.Q < -1e-10 * e.scale) ok = false;
    if (ok) {
      rep.stability_radius = R_c;
      break;
    }
    R_c *= 2.0;
  }
  return rep;
}

}  // namespace khess
