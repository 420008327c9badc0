#include "kamdeg/schedule.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace kamdeg;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

ScheduleConfig base_config(ScheduleMode mode = ScheduleMode::paper) {
  ScheduleConfig c;
  c.epsilon = 1e-8;
  c.m = 3;
  c.n = 2;
  c.d = 1;
  c.tau = 2.0;
  c.s = 0.5;
  c.r = 0.5;
  c.mode = mode;
  return c;
}

bool within_ulps(double a, double b, int ulps) {
  double x = a;
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, b);
  return x == b;
}

}  // namespace

TEST_SUITE("schedule") {
  TEST_CASE("m from L and the admissible L for m") {
    CHECK(m_from_L(2.0) == 3);
    CHECK(m_from_L(3.2) == 3);
    CHECK(m_from_L(3.3) == 4);
    CHECK(max_L_for_m(3) == doctest::Approx(3.2));
    for (int m = 3; m <= 8; ++m) CHECK(m_from_L(max_L_for_m(m)) == m);
    CHECK_THROWS_AS(m_from_L(1.5), std::invalid_argument);
  }

  TEST_CASE("derived triples") {
    ScheduleConfig c = base_config();
    c.m = 0;
    c.L = 2.0;
    const Schedule a = init_schedule(c);
    CHECK(a.m == 3);
    CHECK(a.rho == 0.125);
    CHECK(a.eta == 6);
    CHECK(std::pow(1.125, 5) < 2.0);
    CHECK(std::pow(1.125, 6) > 2.0);
  }

  TEST_CASE("initial parameters follow the closed forms") {
    const Schedule sc = init_schedule(base_config());
    CHECK(sc.exponent == 32.0);
    CHECK(sc.gamma0 == doctest::Approx(std::pow(10.0, -8.0 / 192.0)).epsilon(1e-14));
    CHECK(sc.mu0 == doctest::Approx(std::pow(10.0, -0.25)).epsilon(1e-14));
    CHECK(sc.s0 == doctest::Approx(0.5 * std::pow(10.0, -0.25) * std::pow(sc.gamma0, 32.0)).epsilon(1e-14));
    CHECK(sc.r0 == 0.5);
    CHECK(sc.beta0 == 0.5);
    CHECK(sc.mu_star ==
          doctest::Approx(0.25 * std::pow(1e-8, 1.0 / 16.0) * std::pow(sc.gamma0, 64.0)).epsilon(1e-14));
    // In paper mode K_1 is astronomically large.
    const double k1 = sc.at(1).K;
    CHECK(k1 == std::pow(std::floor(std::log(1.0 / sc.s0)) + 1.0, 18.0));
    CHECK(k1 > 1e12);
    CHECK(sc.at(0).K == 0.0);
  }

  TEST_CASE("halving sequences match the closed form for ten steps") {
    const Schedule sc = init_schedule(base_config());
    // Exact rational recursion against the closed form.
    const cpp_rational r0(1, 2);
    cpp_rational r = r0;
    for (int nu = 1; nu <= 10; ++nu) {
      r = r / 2 + r0 / 4;
      CHECK(r == r0 * (cpp_rational(1, 2) + cpp_rational(1) / cpp_rational(cpp_int(1) << (nu + 1))));
    }
    for (int nu = 0; nu <= 10; ++nu) {
      const StepParams p = sc.at(nu);
      CHECK(within_ulps(p.r, halving_closed_form(sc.r0, nu), 1));
      CHECK(within_ulps(p.beta, halving_closed_form(sc.beta0, nu), 1));
      CHECK(within_ulps(p.gamma, halving_closed_form(sc.gamma0, nu), 1));
      CHECK(within_ulps(p.sigma, halving_closed_form(sc.sigma0, nu), 1));
    }
  }

  TEST_CASE("s recursion matches its closed form for ten steps") {
    const Schedule sc = init_schedule(base_config());
    for (int nu = 0; nu <= 10; ++nu) {
      const double rec = sc.at(nu).s, closed = s_closed_form(sc, nu);
      if (closed == 0.0) {
        CHECK(rec == 0.0);
      } else {
        CHECK(std::abs(rec - closed) <= 1e-12 * closed);
      }
    }
    // mu recursion, c0 = 1.
    StepParams p0 = sc.at(0), p1 = sc.at(1), p2 = sc.at(2);
    CHECK(p1.mu == doctest::Approx(512.0 * p0.mu * std::pow(p0.s, 0.125)).epsilon(1e-14));
    CHECK(p2.mu == doctest::Approx(512.0 * p1.mu * std::pow(p1.s, 0.125)).epsilon(1e-14));
    CHECK(p1.s == doctest::Approx(p0.alpha * p0.s / 8.0).epsilon(1e-14));
  }

  TEST_CASE("practical mode caps K") {
    const Schedule sc = init_schedule(base_config(ScheduleMode::practical));
    CHECK(sc.at(1).K == 8.0);
    CHECK(sc.at(2).K == 16.0);
    CHECK(sc.at(4).K == 64.0);
    CHECK(sc.c0 == 1.0);
  }

  TEST_CASE("invalid configurations") {
    ScheduleConfig c = base_config();
    c.epsilon = 0.0;
    CHECK_THROWS_AS(init_schedule(c), std::invalid_argument);
    c = base_config();
    c.tau = 1.0;
    CHECK_THROWS_AS(init_schedule(c), std::invalid_argument);
    c = base_config();
    c.m = 3;
    c.L = 4.0;
    CHECK_THROWS_AS(init_schedule(c), std::invalid_argument);
    c = base_config();
    c.m = 2;
    CHECK_THROWS_AS(init_schedule(c), std::invalid_argument);
    c = base_config();
    c.m = 0;
    CHECK_THROWS_AS(init_schedule(c), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule_mode("fast"), std::invalid_argument);
    CHECK(parse_schedule_mode("paper") == ScheduleMode::paper);
  }

  TEST_CASE("tail integral against quadrature") {
    for (int n : {1, 2, 3}) {
      const double a = 1.0 / 64.0, K = 1.0;
      // Composite Simpson on [K, K + 6000].
      const int steps = 600000;
      const double hi = K + 6000.0, h = (hi - K) / steps;
      double acc = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double t = K + i * h;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::pow(t, n) * std::exp(-a * t);
      }
      acc *= h / 3.0;
      CHECK(tail_integral(n, a, K) == doctest::Approx(acc).epsilon(1e-9));
    }
    CHECK(tail_integral(2, 0.5, 0.0) == doctest::Approx(16.0));
  }

  TEST_CASE("lattice shells and the Gamma sum") {
    for (long long kappa = 1; kappa <= 6; ++kappa) CHECK(lattice_shell_count(2, kappa) == 4.0 * kappa);
    CHECK(lattice_shell_count(1, 5) == 2.0);
    for (long long kappa = 0; kappa <= 5; ++kappa) {
      int count = 0;
      for (int a = -5; a <= 5; ++a)
        for (int b = -5; b <= 5; ++b)
          for (int c = -5; c <= 5; ++c) count += std::abs(a) + std::abs(b) + std::abs(c) == kappa;
      CHECK(lattice_shell_count(3, kappa) == count);
    }
    ScheduleConfig c = base_config(ScheduleMode::practical);
    c.tau = 1.5;
    const Schedule sc = init_schedule(c);
    double brute = 0.0;
    const double p = sc.exponent * 1.5 + 3.0;
    for (int a = -6; a <= 6; ++a)
      for (int b = -6; b <= 6; ++b) {
        const int k = std::abs(a) + std::abs(b);
        if (k == 0 || k > 6) continue;
        brute += std::pow(k, p) * std::exp(-k * 0.125 / 8.0);
      }
    CHECK(std::exp(log_gamma_sum(sc, 6.0, 0.125)) == doctest::Approx(brute).epsilon(1e-12));
  }

  TEST_CASE("hypothesis report") {
    const Schedule sc = init_schedule(base_config(ScheduleMode::practical));
    HypothesisInputs in;
    const HypothesisReport rep = verify_hypotheses(sc, in);
    REQUIRE(rep.rows.size() == 10);
    CHECK(rep.get("H0").pass);
    CHECK(rep.get("H0").margin == 1.0);
    for (const HypothesisRow& row : rep.rows) CHECK(row.pass == (row.margin > 0.0));
    // H8 at step 0: gamma - gamma+ = gamma0 / 4, so the right side is 1/4.
    const HypothesisRow& h8 = rep.get("H8");
    CHECK(h8.rhs == doctest::Approx(0.25).epsilon(1e-14));
    const double lhs = 3.0 * sc.s0 * std::pow(8.0, 5.0);
    CHECK(h8.lhs == doctest::Approx(lhs));
    CHECK((h8.margin > 0.0) == (0.25 - lhs > 0.0));
    CHECK(rep.get("H2").rhs == doctest::Approx(std::sqrt(sc.s0)));
    CHECK_THROWS_AS(rep.get("H10"), std::out_of_range);
  }
}
