#include "algebra_properties.hpp"
#include "support.hpp"

#include "kamdeg/series.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace kamdeg;
using namespace kamdeg::testing;

namespace {

const Caps kAmple = Caps::ample();

TFSeries mono(const std::vector<int>& k, const std::vector<int>& iota, const std::vector<int>& j,
              Complex c, Caps caps = kAmple) {
  return TFSeries::monomial(static_cast<int>(k.size()), static_cast<int>(j.size()) / 2, caps,
                            make_index(k, iota, j), c);
}

// cos<k,x> as a conjugate pair.
TFSeries cos_mode(const std::vector<int>& k, double amp, const std::vector<int>& iota,
                  const std::vector<int>& j) {
  std::vector<int> mk(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
  return mono(k, iota, j, 0.5 * amp) + mono(mk, iota, j, 0.5 * amp);
}

}  // namespace

TEST_SUITE("series") {
  TEST_CASE("multi-index degrees") {
    const MultiIndex m = make_index({3, -2}, {1, 2}, {1, 0});
    CHECK(mode_norm(m, 2) == 5);
    CHECK(weighted_degree(m, 2, 1) == 7);
    CHECK_THROWS_AS(make_index({1}, {1, 1}, {0, 0}), DimensionError);
  }

  TEST_CASE("add_scale examples") {
    Rng rng(1);
    const TFSeries f = random_series(rng, 2, 1, 10, 3, 4, kAmple);
    const TFSeries g = random_series(rng, 2, 1, 10, 3, 4, kAmple);
    CHECK(add_scale(1.0, f, -f).empty());
    CHECK(add_scale(0.0, f, g) == g);
    for (int t = 0; t < 10; ++t) {
      const Vec x = random_vec(rng, 2, 0, 6.28), y = random_vec(rng, 2, -1, 1),
                z = random_vec(rng, 2, -1, 1);
      const double a = 1.7;
      const double lhs = evaluate_point(add_scale(a, f, g), x, y, z);
      const double rhs = a * evaluate_point(f, x, y, z) + evaluate_point(g, x, y, z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
    CHECK_THROWS_AS(add_scale(1.0, f, TFSeries(1, 1, kAmple)), DimensionError);
  }

  TEST_CASE("caps of add_scale are the componentwise max") {
    const TFSeries a(2, 1, {3, 9}), b(2, 1, {7, 2});
    CHECK(add_scale(1.0, a, b).caps() == Caps{7, 9});
  }

  TEST_CASE("multiply examples") {
    const TFSeries y1 = mono({0, 0}, {1, 0}, {0, 0}, 1.0);
    const TFSeries z1 = mono({0, 0}, {0, 0}, {1, 0}, 1.0);
    const TFSeries p = multiply(y1, z1, kAmple);
    REQUIRE(p.size() == 1);
    CHECK(p.coeff(make_index({0, 0}, {1, 0}, {1, 0})) == Complex(1.0));

    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
      const TFSeries f = random_series(rng, 2, 1, 6, 3, 4, kAmple);
      const TFSeries g = random_series(rng, 2, 1, 6, 3, 4, kAmple);
      CHECK(multiply(f, g, kAmple) == multiply(g, f, kAmple));
      const Vec x = random_vec(rng, 2, 0, 6.28), y = random_vec(rng, 2, -1, 1),
                z = random_vec(rng, 2, -1, 1);
      const double lhs = evaluate_point(multiply(f, g, kAmple), x, y, z);
      const double rhs = evaluate_point(f, x, y, z) * evaluate_point(g, x, y, z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }

  TEST_CASE("multiply truncates to caps") {
    const TFSeries u = mono({0}, {0}, {1, 0}, 1.0);
    const TFSeries p = multiply(u, u, {4, 1});
    CHECK(p.empty());
  }

  TEST_CASE("partial derivative examples") {
    const TFSeries y2 = mono({0}, {2}, {0, 0}, 1.0);
    const TFSeries dy = partial_derivative(y2, Var::y(0));
    CHECK(dy == mono({0}, {1}, {0, 0}, 2.0));
    const TFSeries e = mono({3, -1}, {0, 0}, {0, 0}, 1.0);
    CHECK(partial_derivative(e, Var::x(0)) == mono({3, -1}, {0, 0}, {0, 0}, Complex(0.0, 3.0)));
    CHECK_THROWS_AS(partial_derivative(e, Var::z(2)), std::out_of_range);
    CHECK_THROWS_AS(partial_derivative(e, Var::x(-1)), std::out_of_range);
  }

  TEST_CASE("poisson bracket examples") {
    Rng rng(3);
    const TFSeries f = random_series(rng, 2, 1, 8, 2, 4, kAmple);
    CHECK(poisson_bracket(f, f, kAmple).empty());

    const double w1 = 1.0, w2 = 0.6180339887498949;
    const TFSeries wy = mono({0, 0}, {1, 0}, {0, 0}, w1) + mono({0, 0}, {0, 1}, {0, 0}, w2);
    const TFSeries e = mono({2, -3}, {0, 0}, {0, 0}, 1.0);
    const TFSeries br = poisson_bracket(wy, e, kAmple);
    const double kw = 2 * w1 - 3 * w2;
    REQUIRE(br.size() == 1);
    CHECK(std::abs(br.coeff(make_index({2, -3}, {0, 0}, {0, 0})) - Complex(0.0, -kw)) < 1e-15);
  }

  TEST_CASE("bracket of z with u is the symplectic pairing") {
    const TFSeries u = mono({0}, {0}, {1, 0}, 1.0);
    const TFSeries v = mono({0}, {0}, {0, 1}, 1.0);
    CHECK(poisson_bracket(u, v, kAmple) == TFSeries::constant(1, 1, kAmple, 1.0));
  }

  TEST_CASE("truncate examples") {
    const TFSeries p = mono({5, 0}, {0, 0}, {0, 0}, 1.0) + mono({-5, 0}, {0, 0}, {0, 0}, 1.0);
    Truncation tr = truncate(p, 3, 3);
    CHECK(tr.R.empty());
    CHECK(tr.tail == p);
    const TFSeries q = mono({1, 0}, {0, 0}, {1, 1}, 1.0) + mono({0, 0}, {1, 0}, {0, 0}, 2.0);
    tr = truncate(q, 3, 3);
    CHECK(tr.R == q);
    CHECK(tr.tail.empty());
    CHECK_THROWS(truncate(q, 0, 3));
    CHECK_THROWS(truncate(q, 2, 1));
  }

  TEST_CASE("truncation tail decays at the shrunken width") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
      const TFSeries p = random_series(rng, 2, 1, 20, 8, 7, kAmple);
      const int k_plus = std::uniform_int_distribution<int>(1, 6)(rng);
      const int m = std::uniform_int_distribution<int>(2, 4)(rng);
      const double s = uniform(rng, 0.05, 0.9), r = uniform(rng, 0.2, 0.9);
      const double rp = r * uniform(rng, 0.3, 0.9);
      const Truncation tr = truncate(p, k_plus, m);
      const double lhs = majorant_norm(tr.tail, {s, rp});
      const double rhs = majorant_norm(p, {s, r}) * (std::exp(-k_plus * (r - rp)) + s);
      CHECK(lhs <= rhs * (1 + 1e-12));
    }
  }

  TEST_CASE("average examples and quadrature oracle") {
    const TFSeries e = mono({1, 2}, {0, 0}, {0, 0}, 1.0);
    CHECK(average(e).empty());
    Rng rng(5);
    const TFSeries r = random_series(rng, 2, 1, 12, 3, 4, kAmple);
    CHECK(average(average(r)) == average(r));
    // An 8-point rule per angle is exact for |k_i| <= 3 < 8.
    for (int t = 0; t < 5; ++t) {
      const Vec y = random_vec(rng, 2, -1, 1), z = random_vec(rng, 2, -1, 1);
      double quad = 0.0;
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          Vec x(2);
          x << 2 * M_PI * a / 8, 2 * M_PI * b / 8;
          quad += evaluate_point(r, x, y, z);
        }
      quad /= 64.0;
      CHECK(std::abs(quad - evaluate_point(average(r), Vec::Zero(2), y, z)) < 1e-10);
    }
  }

  TEST_CASE("shift_z examples") {
    const TFSeries z1 = mono({0}, {0}, {1, 0}, 1.0);
    Vec delta(2);
    delta << 0.3, -0.2;
    const TFSeries shifted = shift_z(z1, delta, kAmple);
    CHECK(shifted == z1 + TFSeries::constant(1, 1, kAmple, 0.3));

    Rng rng(6);
    const TFSeries f = random_series(rng, 2, 1, 10, 2, 5, kAmple);
    CHECK(shift_z(f, Vec::Zero(2), kAmple) == f);
    for (int t = 0; t < 10; ++t) {
      const Vec dz = random_vec(rng, 2, -0.5, 0.5);
      const Vec x = random_vec(rng, 2, 0, 6.28), y = random_vec(rng, 2, -1, 1),
                z = random_vec(rng, 2, -1, 1);
      const double lhs = evaluate_point(shift_z(f, dz, kAmple), x, y, z);
      const double rhs = evaluate_point(f, x, y, z + dz);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }

  TEST_CASE("majorant norm examples") {
    CHECK(majorant_norm(TFSeries::constant(1, 1, kAmple, -2.5), {0.5, 0.5}) == 2.5);
    const TFSeries f = mono({1}, {1}, {0, 0}, 1.0);
    CHECK(majorant_norm(f, {0.5, 0.1}) == doctest::Approx(0.25 * std::exp(0.1)).epsilon(1e-15));
    CHECK(majorant_norm(TFSeries(1, 1, kAmple), {0.5, 0.5}) == 0.0);
    CHECK_THROWS(majorant_norm(f, {1.0, 0.5}));
    CHECK_THROWS(majorant_norm(f, {0.5, 0.0}));
  }

  TEST_CASE("majorant norm is a norm") {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
      const TFSeries f = random_series(rng, 2, 1, 8, 3, 4, kAmple);
      const TFSeries g = random_series(rng, 2, 1, 8, 3, 4, kAmple);
      const DomainParams dom{uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 0.9)};
      CHECK(majorant_norm(f + g, dom) <= (majorant_norm(f, dom) + majorant_norm(g, dom)) * (1 + 1e-14));
      CHECK(majorant_norm(Complex(-3.0) * f, dom) ==
            doctest::Approx(3.0 * majorant_norm(f, dom)).epsilon(1e-14));
    }
  }

  TEST_CASE("lie transform examples") {
    Rng rng(8);
    const TFSeries h = random_series(rng, 2, 1, 8, 2, 4, kAmple);
    CHECK(lie_transform(h, TFSeries(2, 1, kAmple), kAmple, 10) == h);

    // {u, c v} = c, so the series stops after one term.
    const TFSeries u = mono({0}, {0}, {1, 0}, 1.0);
    const TFSeries f = mono({0}, {0}, {0, 1}, 0.25);
    CHECK(lie_transform(u, f, kAmple, 10) == u + TFSeries::constant(1, 1, kAmple, 0.25));
  }

  TEST_CASE("lie series signals non-convergence") {
    // {u, 50uv} = 50u, so the terms grow like 50^q / q! for small q.
    const TFSeries u = mono({0}, {0}, {1, 0}, 1.0);
    const TFSeries gen = mono({0}, {0}, {1, 1}, 50.0);
    CHECK_THROWS_AS(lie_transform(u, gen, kAmple, 3), LieSeriesError);
  }

  TEST_CASE("evaluate_point examples") {
    CHECK(evaluate_point(TFSeries::constant(2, 1, kAmple, 4.25), Vec::Zero(2), Vec::Zero(2),
                         Vec::Zero(2)) == 4.25);
    const TFSeries c = cos_mode({2, 1}, 1.0, {0, 0}, {0, 0});
    CHECK(evaluate_point(c, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)) == 1.0);
  }

  TEST_CASE("evaluate_point against exact rational arithmetic") {
    using boost::multiprecision::cpp_rational;
    // With x_i = m_i * theta, cos theta = 3/5, every Fourier factor is rational.
    struct Q2 {
      cpp_rational re, im;
    };
    auto qmul = [](const Q2& a, const Q2& b) {
      return Q2{a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    };
    const Q2 w{cpp_rational(3, 5), cpp_rational(4, 5)};
    const Q2 wbar{cpp_rational(3, 5), cpp_rational(-4, 5)};
    const double theta = std::atan2(4.0, 3.0);

    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
      // Dyadic coefficients and arguments are exact in binary floating point.
      std::vector<Term> terms;
      std::uniform_int_distribution<int> kd(-3, 3), ed(0, 2), cd(-64, 64);
      for (int i = 0; i < 5; ++i) {
        const MultiIndex idx = make_index({kd(rng), kd(rng)}, {ed(rng), ed(rng)}, {ed(rng), ed(rng)});
        const Complex c(cd(rng) / 32.0, is_zero_mode(idx, 2) ? 0.0 : cd(rng) / 32.0);
        terms.push_back({idx, c});
        if (!is_zero_mode(idx, 2)) terms.push_back({conjugate_index(idx, 2), std::conj(c)});
      }
      const TFSeries f = TFSeries::from_terms(2, 1, kAmple, terms);
      const int m1 = kd(rng), m2 = kd(rng);
      const int y1 = cd(rng), y2 = cd(rng), z1 = cd(rng), z2 = cd(rng);
      Vec x(2), y(2), z(2);
      x << m1 * theta, m2 * theta;
      y << y1 / 64.0, y2 / 64.0;
      z << z1 / 64.0, z2 / 64.0;

      cpp_rational exact = 0;
      for (const Term& term : f.terms()) {
        const int phase = term.idx.v[0] * m1 + term.idx.v[1] * m2;
        Q2 e{1, 0};
        for (int p = 0; p < std::abs(phase); ++p) e = qmul(e, phase > 0 ? w : wbar);
        cpp_rational mono = 1;
        const cpp_rational args[4] = {cpp_rational(y1, 64), cpp_rational(y2, 64),
                                      cpp_rational(z1, 64), cpp_rational(z2, 64)};
        for (int s = 0; s < 4; ++s)
          for (int p = 0; p < term.idx.v[2 + s]; ++p) mono *= args[s];
        const cpp_rational cre(term.c.real()), cim(term.c.imag());
        exact += mono * (cre * e.re - cim * e.im);
      }
      const double got = evaluate_point(f, x, y, z);
      CHECK(std::abs(got - static_cast<double>(exact)) <= 1e-14 * std::max(1.0, std::abs(got)));
    }
  }

  TEST_CASE("reality is preserved by the operations") {
    Rng rng(10);
    const TFSeries f = random_series(rng, 2, 1, 8, 2, 4, kAmple);
    const TFSeries g = random_series(rng, 2, 1, 8, 2, 4, kAmple);
    CHECK(reality_defect(f) == 0.0);
    CHECK(reality_defect(multiply(f, g, kAmple)) < 1e-14);
    CHECK(reality_defect(poisson_bracket(f, g, kAmple)) < 1e-14);
    CHECK(reality_defect(partial_derivative(f, Var::x(1))) < 1e-14);
    Vec dz(2);
    dz << 0.1, -0.3;
    CHECK(reality_defect(shift_z(f, dz, kAmple)) < 1e-14);
    const TFSeries lopsided = mono({1}, {0}, {0, 0}, Complex(1.0, 2.0));
    CHECK(reality_defect(enforce_reality(lopsided)) == 0.0);
  }

  TEST_CASE("serialization round-trips byte-stably") {
    Rng rng(11);
    const TFSeries f = random_series(rng, 2, 1, 15, 4, 5, {9, 7});
    const std::string text = to_string(f);
    std::istringstream in(text);
    const TFSeries g = read_series(in);
    CHECK(g == f);
    CHECK(g.caps() == f.caps());
    CHECK(to_string(g) == text);
    CHECK(text.rfind("TFS 2 1 9 7\n", 0) == 0);
  }

  TEST_CASE("randomized algebra properties") {
    Rng rng(12);
    CHECK(check_antisymmetry(rng, 100).pass());
    CHECK(check_jacobi(rng, 100).pass());
    CHECK(check_leibniz(rng, 100).pass());
    CHECK(check_submultiplicative(rng, 100).pass());
    CHECK(check_truncation_split(rng, 100).pass());
    CHECK(check_shift_group_action(rng, 100).pass());
    CHECK(check_derivative_fd(rng, 100).pass());
  }
}
