#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "khess/params.hpp"

using namespace khess;

namespace {
// frozen 50-digit evaluations of the exponent formulas
constexpr double kPjl_20_2 = 3.9114378277661476;
constexpr double kP2_20_2 = 2.5885621722338524;
}  // namespace

TEST_CASE("binomial coefficient is exact") {
  CHECK(binomial_coeff(8, 1) == 8.0);
  CHECK(binomial_coeff(19, 1) == 19.0);
  CHECK(binomial_coeff(10, 3) == 120.0);
  CHECK(binomial_coeff(67, 1) == 67.0);
  CHECK(binomial_coeff(52, 5) == 2598960.0);
  CHECK_THROWS_AS(binomial_coeff(3, 5), std::domain_error);
}

TEST_CASE("params validation") {
  CHECK_THROWS_AS(Params::make(9, 1, 5.0), std::domain_error);   // k too small
  CHECK_THROWS_AS(Params::make(4, 2, 5.0), std::domain_error);   // 2k >= n
  CHECK_THROWS_AS(Params::make(9, 2, 3.5), std::domain_error);   // p <= p_se = 3.6
  CHECK_THROWS_AS(Params::make(9, 2, 3.6), std::domain_error);   // boundary
  const Params prm = Params::make(9, 2, 5.0);
  CHECK(prm.binom == 8.0);
  CHECK(prm.theta() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("exponents at (9,2): infinite Joseph-Lundgren branch") {
  const ExponentSet e = compute_exponents(9, 2);
  CHECK(e.p_se == doctest::Approx(3.6).epsilon(1e-15));
  CHECK(e.p_so == doctest::Approx(4.4).epsilon(1e-15));
  CHECK(e.p_star == doctest::Approx(5.2).epsilon(1e-15));
  CHECK(std::isinf(e.p_jl));
  CHECK(!e.jl_finite());
  CHECK(!e.p_2.has_value());
}

TEST_CASE("exponents at (20,2) against the high-precision oracle") {
  const ExponentSet e = compute_exponents(20, 2);
  CHECK(e.p_se == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(e.p_so == doctest::Approx(2.75).epsilon(1e-14));
  CHECK(e.p_star == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.p_jl == doctest::Approx(kPjl_20_2).epsilon(1e-14));
  REQUIRE(e.p_2.has_value());
  CHECK(*e.p_2 == doctest::Approx(kP2_20_2).epsilon(1e-14));
}

TEST_CASE("threshold dimension: p_star = p_jl = 2.25 at (68,2)") {
  const ExponentSet e = compute_exponents(68, 2);
  CHECK(e.p_star == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(e.p_jl == doctest::Approx(2.25).epsilon(1e-12));
  // sign of p_star - p_jl flips exactly at n = 2k(k^2+6k+1)/(k-1)^2 = 68
  CHECK(compute_exponents(67, 2).p_star < compute_exponents(67, 2).p_jl);
  CHECK(compute_exponents(69, 2).p_star > compute_exponents(69, 2).p_jl);
}

TEST_CASE("exponent ordering over a sweep of (n,k)") {
  for (int k = 2; k <= 8; ++k) {
    for (int n = 2 * k + 1; n <= 200; ++n) {
      const ExponentSet e = compute_exponents(n, k);
      CAPTURE(n);
      CAPTURE(k);
      CHECK(e.p_se < e.p_so);
      CHECK(e.p_so < e.p_star);
      if (e.jl_finite()) CHECK(e.p_so < e.p_jl);
      CHECK(e.jl_finite() == (n >= 2 * k + 9));
      CHECK(e.p_2.has_value() == (n >= 2 * k + 9));
    }
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(Params::make(9, 2, 4.0)).tag == RegimeTag::Subcritical);
  CHECK(classify_regime(Params::make(9, 2, 4.4)).tag == RegimeTag::Critical);
  CHECK(classify_regime(Params::make(9, 2, 5.0)).tag == RegimeTag::SupercriticalPreJL);

  const Regime r = classify_regime(Params::make(20, 2, 4.0));
  CHECK(r.tag == RegimeTag::JLStable);
  CHECK(r.ge_p_star);
  CHECK(!r.le_p2);

  const Regime r2 = classify_regime(Params::make(20, 2, 2.55));
  CHECK(r2.tag == RegimeTag::Subcritical);
  CHECK(r2.le_p2);

  CHECK_THROWS_AS(classify_regime(Params{20, 2, 2.5, 19.0}), std::domain_error);
}

TEST_CASE("jl quadratic vanishes at its roots") {
  const ExponentSet e = compute_exponents(20, 2);
  // scale of the quadratic coefficients at p ~ p_jl
  const double scale = (20 - 4) * (20 - 12) * e.p_jl * e.p_jl;
  CHECK(std::fabs(jl_quadratic_residual(20, 2, e.p_jl)) <= 1e-6 * scale);
  CHECK(std::fabs(jl_quadratic_residual(20, 2, *e.p_2)) <= 1e-6 * scale);
  CHECK(jl_quadratic_residual(20, 2, 2.75) < 0.0);  // inside the root interval
  CHECK_THROWS_AS(jl_quadratic_residual(9, 2, 4.0), std::domain_error);
}

TEST_CASE("f function: defining property, monotonicity, limit") {
  const ExponentSet e = compute_exponents(20, 2);
  CHECK(f_function(20, 2, e.p_jl) == doctest::Approx(21.0).epsilon(1e-8));
  CHECK(f_function(20, 2, 10.0) > 13.0);
  CHECK(f_function(9, 2, 1e6) == doctest::Approx(13.0).epsilon(1e-3));
  CHECK_THROWS_AS(f_function(20, 2, 2.0), std::domain_error);

  double prev = f_function(20, 2, 2.01);
  for (double t = 2.2; t < 50.0; t += 0.2) {
    const double v = f_function(20, 2, t);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("f(p_jl) = n+1 and quadratic roots across the (n,k) table") {
  for (int k = 2; k <= 4; ++k) {
    for (int n = 2 * k + 9; n <= 100; ++n) {
      const ExponentSet e = compute_exponents(n, k);
      CAPTURE(n);
      CAPTURE(k);
      const double scale =
          std::fabs((n - 2.0 * k) * (n - 2.0 * k - 8) * e.p_jl * e.p_jl) +
          std::fabs(k * k * (n - 2.0) * (n - 2.0));
      CHECK(std::fabs(jl_quadratic_residual(n, k, e.p_jl)) <= 1e-6 * scale);
      CHECK(std::fabs(jl_quadratic_residual(n, k, *e.p_2)) <= 1e-6 * scale);
      CHECK(f_function(n, k, e.p_jl) == doctest::Approx(n + 1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("stability condition at (20,2)") {
  const StabilityCondition c4 = stability_condition_315(Params::make(20, 2, 4.0));
  CHECK(c4.lhs == doctest::Approx(48.0).epsilon(1e-14));
  CHECK(c4.rhs == doctest::Approx(49.0).epsilon(1e-14));
  CHECK(c4.holds);

  const StabilityCondition c3 = stability_condition_315(Params::make(20, 2, 3.0));
  CHECK(c3.lhs == doctest::Approx(48.0).epsilon(1e-14));
  CHECK(c3.rhs == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(!c3.holds);

  const StabilityCondition ceq = stability_condition_315(Params::make(20, 2, kPjl_20_2));
  CHECK(ceq.lhs == doctest::Approx(ceq.rhs).epsilon(1e-8));
}

TEST_CASE("stability condition matches the root intervals for random p") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> kd(2, 4);
    const int k = kd(rng);
    std::uniform_int_distribution<int> nd(2 * k + 9, 120);
    const int n = nd(rng);
    const ExponentSet e = compute_exponents(n, k);
    std::uniform_real_distribution<double> pd(e.p_se * (1 + 1e-6), 3.0 * e.p_jl);
    const double p = pd(rng);
    // skip the immediate neighborhoods of the roots where roundoff decides
    if (std::fabs(p - e.p_jl) < 1e-9 * e.p_jl || std::fabs(p - *e.p_2) < 1e-9 * *e.p_2)
      continue;
    const Params prm = Params::make(n, k, p);
    const bool in_stable_range = (p <= *e.p_2 || p >= e.p_jl);
    CAPTURE(n);
    CAPTURE(k);
    CAPTURE(p);
    CHECK(stability_condition_315(prm).holds == in_stable_range);
  }
}
