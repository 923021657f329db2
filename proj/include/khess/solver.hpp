#ifndef KHESS_SOLVER_HPP
#define KHESS_SOLVER_HPP

#include <utility>
#include <vector>

#include "khess/params.hpp"
#include "khess/radial_fn.hpp"

namespace khess {

enum class Termination { ReachedRmax, ZeroCrossing, StepUnderflow };
const char* to_string(Termination t);

enum class GridOutput { AdaptiveNodes, LogUniform };

struct SolveOptions {
  double r_max = 1e3;
  double rtol = 1e-10;
  double atol = 1e-12;
  // Series-start radius; 0 selects 1e-6 * rho^{-(p-k)/(2k)} (the scaling
  // length of the problem).
  double r_init = 0.0;
  long max_steps = 4000000;
  GridOutput grid_output = GridOutput::AdaptiveNodes;
  int log_grid_points = 400;  // used when grid_output == LogUniform
};

// A computed radial solution. u is strictly positive and strictly
// decreasing on the stored grid; du <= 0 with du < 0 for r > 0; F is the
// cumulative source integral of the integral reformulation
//   |u'|^k = (k / C(n-1,k-1)) F(r) / r^{n-k},  F(r) = int_0^r s^{n-1} u^p ds,
// which holds at every node to solver tolerance. I_grad and I_pow carry
//   int_0^r s^{n-k} |u'|^{k+1} ds   and   int_0^r s^{n-1} u^{p+1} ds,
// accumulated alongside the solve for the integral identities.
struct RadialProfile {
  Params params;
  double rho = 0.0;
  SolveOptions options;

  std::vector<double> grid;  // strictly increasing, grid[0] == 0
  std::vector<double> u;
  std::vector<double> du;
  std::vector<double> F;
  std::vector<double> I_grad;
  std::vector<double> I_pow;

  Termination termination = Termination::ReachedRmax;
  double r_star = 0.0;  // zero-crossing radius when termination == ZeroCrossing

  std::size_t size() const { return grid.size(); }
  double r_last() const { return grid.back(); }
};

// Integrates the regular initial value problem u(0) = rho, u'(0) = 0 with
// an adaptive embedded Dormand-Prince 5(4) pair in the (u, F) variables.
// If u reaches zero the final step is bisected to |u(r_star)| <= atol and
// the profile terminates with ZeroCrossing (the grid keeps only strictly
// positive nodes; r_star is metadata).
RadialProfile solve_ivp(const Params& params, double rho, const SolveOptions& opts = {});

// Profile of u_mu(r) = mu^{2k/(p-k)} u(mu r) on the rescaled grid.
RadialProfile rescale(const RadialProfile& profile, double mu);

// Monotone cubic interpolation of u (positivity- and monotonicity-
// preserving); du is recovered from the integral relation through the
// interpolated F, not by differencing the u interpolant. Exact at nodes.
std::pair<double, double> interpolate(const RadialProfile& profile, double r);

// Log-uniform resampling of the positive-radius part of the grid (the
// r = 0 node is kept). Used for report output.
RadialProfile resample_log_uniform(const RadialProfile& profile, int count);

struct PowerLawTail {
  double coefficient = 0.0;
  double exponent = 0.0;
  double value(double r) const;
  double deriv(double r) const;
};

// RadialFunction view over a profile. Beyond the last node: a ZeroCrossing
// profile evaluates to 0; other profiles require an explicit power-law tail
// extension (or throw std::out_of_range).
class ProfileFunction final : public RadialFunction {
 public:
  explicit ProfileFunction(const RadialProfile& profile);
  ProfileFunction(const RadialProfile& profile, PowerLawTail tail);

  double value(double r) const override;
  double deriv(double r) const override;

  bool extended() const { return has_tail_; }
  const PowerLawTail& tail() const { return tail_; }
  double r_last() const;

 private:
  const RadialProfile& profile_;
  PowerLawTail tail_{};
  bool has_tail_ = false;
};

}  // namespace khess

#endif
