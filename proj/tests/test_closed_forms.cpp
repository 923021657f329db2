#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "khess/closed_forms.hpp"
#include "khess/errors.hpp"
#include "khess/radial_fn.hpp"

using namespace khess;

namespace {
// frozen 50-digit oracle values
constexpr double kA_9_2_5 = 2.5505749103631855;        // (448/27)^{1/3}
constexpr double kUc0_9_2 = 1.7817974362806786;        // 4^{1/2.4}
constexpr double kUc_9_2_r25 = 0.83523086777297505;    // family rho=1 at r=2.5
}  // namespace

TEST_CASE("singular coefficient A") {
  CHECK(singular_coefficient_A(Params::make(9, 2, 5.0)) ==
        doctest::Approx(kA_9_2_5).epsilon(1e-14));
  CHECK(singular_coefficient_A(Params::make(20, 2, 3.0)) ==
        doctest::Approx(1216.0).epsilon(1e-13));
  // A -> 0 as p -> p_se from above
  CHECK(singular_coefficient_A(Params::make(9, 2, 3.6 + 1e-9)) < 1e-3);
  CHECK(singular_coefficient_A(Params::make(9, 2, 3.6 + 1e-6)) <
        singular_coefficient_A(Params::make(9, 2, 3.7)));
}

TEST_CASE("singular form evaluation") {
  const ClosedForm us = ClosedForm::singular(Params::make(9, 2, 5.0));
  CHECK(us.value(1.0) == doctest::Approx(kA_9_2_5).epsilon(1e-14));
  CHECK_THROWS_AS(us.value(0.0), std::domain_error);
  // pure power law: u(2r)/u(r) = 2^{-2k/(p-k)}
  const double ratio = std::pow(2.0, -4.0 / 3.0);
  for (double r : {0.3, 1.0, 7.0, 123.0})
    CHECK(us.value(2.0 * r) / us.value(r) == doctest::Approx(ratio).epsilon(1e-14));
}

TEST_CASE("critical family evaluation and center value") {
  const Params prm = Params::make(9, 2, 4.4);
  const ClosedForm uc = ClosedForm::critical_regular(prm, 1.0);
  CHECK(uc.value(0.0) == doctest::Approx(kUc0_9_2).epsilon(1e-14));
  CHECK(uc.deriv(0.0) == 0.0);
  CHECK(uc.center_value() == doctest::Approx(kUc0_9_2).epsilon(1e-14));
  CHECK(uc.family_rho() == 1.0);
  CHECK(uc.value(2.5) == doctest::Approx(kUc_9_2_r25).epsilon(1e-13));
  CHECK_THROWS_AS(ClosedForm::critical_regular(Params::make(9, 2, 5.0), 1.0),
                  std::domain_error);
}

TEST_CASE("scaling covariance of the singular solution") {
  const ClosedForm us = ClosedForm::singular(Params::make(9, 2, 5.0));
  const double theta = 4.0 / 3.0;
  for (double mu : {0.25, 2.0, 31.0})
    for (double r : {0.1, 1.0, 44.0})
      CHECK(std::pow(mu, theta) * us.value(mu * r) ==
            doctest::Approx(us.value(r)).epsilon(1e-13));
}

TEST_CASE("critical family scaling relation") {
  const Params prm = Params::make(9, 2, 4.4);
  const double theta = prm.theta();
  const ClosedForm u1 = ClosedForm::critical_regular(prm, 1.0);
  for (double mu : {0.5, 2.0, 10.0}) {
    const ClosedForm umu = ClosedForm::critical_regular(prm, std::pow(mu, theta));
    for (double r : {0.0, 0.3, 1.0, 5.0, 40.0}) {
      CHECK(std::pow(mu, theta) * u1.value(mu * r) ==
            doctest::Approx(umu.value(r)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ode residual vanishes on the singular solution") {
  const Params prm = Params::make(9, 2, 5.0);
  const ClosedForm us = ClosedForm::singular(prm);
  for (double r : {0.5, 1.0, 5.0}) {
    const double scale = std::pow(r, 8.0) * std::pow(us.value(r), 5.0);
    CHECK(std::fabs(ode_residual(us, prm, r)) <= 1e-8 * scale);
  }
}

TEST_CASE("ode residual vanishes on the critical family") {
  const Params prm = Params::make(9, 2, 4.4);
  const ClosedForm uc = ClosedForm::critical_regular(prm, 1.0);
  for (double r : {0.1, 1.0, 10.0}) {
    const double scale = std::pow(r, 8.0) * std::pow(uc.value(r), 4.4);
    CHECK(std::fabs(ode_residual(uc, prm, r)) <= 1e-8 * scale);
  }
}

TEST_CASE("finite-difference fallback matches the analytic path") {
  const Params prm = Params::make(9, 2, 5.0);
  const ClosedForm us = ClosedForm::singular(prm);
  // hide the analytic second derivative behind a lambda adapter
  const LambdaRadialFunction fd([&](double r) { return us.value(r); },
                                [&](double r) { return us.deriv(r); });
  for (double r : {0.5, 1.0, 5.0, 50.0}) {
    const double scale = std::pow(r, 8.0) * std::pow(us.value(r), 5.0);
    CHECK(std::fabs(ode_residual(fd, prm, r)) <= 1e-8 * scale);
  }
}

TEST_CASE("residual of a constant is minus the source term") {
  const Params prm = Params::make(9, 2, 5.0);
  const ConstantRadialFunction c(1.5);
  for (double r : {0.5, 2.0}) {
    const double expected = -std::pow(r, 8.0) * std::pow(1.5, 5.0);
    CHECK(ode_residual(c, prm, r) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("fd path reports non-applicability when u' changes sign") {
  const Params prm = Params::make(9, 2, 5.0);
  // u with a local minimum near r = 1
  const LambdaRadialFunction wiggle([](double r) { return 2.0 + (r - 1.0) * (r - 1.0); },
                                    [](double r) { return 2.0 * (r - 1.0); });
  CHECK_THROWS_AS(ode_residual(wiggle, prm, 1.0), NotApplicableError);
}

TEST_CASE("residuals vanish across random valid parameter triples") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> kd(2, 4);
    const int k = kd(rng);
    std::uniform_int_distribution<int> nd(2 * k + 1, 40);
    const int n = nd(rng);
    const ExponentSet e = compute_exponents(n, k);
    std::uniform_real_distribution<double> pd(e.p_se * 1.02, e.p_se * 3.0);
    const Params prm = Params::make(n, k, pd(rng));
    const ClosedForm us = ClosedForm::singular(prm);
    for (double r : {0.1, 1.0, 10.0, 100.0}) {
      const double scale = std::pow(r, n - 1.0) * std::pow(us.value(r), prm.p);
      CAPTURE(n);
      CAPTURE(k);
      CAPTURE(prm.p);
      CHECK(std::fabs(ode_residual(us, prm, r)) <= 1e-8 * scale);
    }
  }
}
