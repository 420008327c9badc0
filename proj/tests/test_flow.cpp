#include "fixtures.hpp"
#include "support.hpp"

#include "kamdeg/flow.hpp"
#include "kamdeg/kam.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace kamdeg;
using namespace kamdeg::testing;

namespace {

Schedule acceptance_schedule(double eps = 1e-6) {
  ScheduleConfig c;
  c.epsilon = eps;
  c.m = 3;
  c.L = 3.0;
  c.tau = 2.0;
  return init_schedule(c);
}

Vec state(std::initializer_list<double> v) {
  Vec s(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("evaluator matches direct evaluation and finite differences") {
    Rng rng(11);
    const TFSeries f = random_series(rng, 2, 1, 40, 5, 6, Caps::ample());
    const SeriesEvaluator ev(f);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec s = random_vec(rng, 6, -0.7, 0.7);
      Vec grad;
      const double v = ev.value_and_gradient(s, grad);
      CHECK(v == doctest::Approx(evaluate_point(f, s.head(2), s.segment(2, 2), s.tail(2))).epsilon(1e-12));
      for (int a = 0; a < 6; ++a) {
        const double h = 1e-6;
        Vec sp = s, sm = s;
        sp[a] += h;
        sm[a] -= h;
        const double fd = (ev.value(sp) - ev.value(sm)) / (2 * h);
        CHECK(std::abs(grad[a] - fd) <= 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }

  TEST_CASE("evaluator rejects complex series and bad states") {
    const TFSeries bad = TFSeries::monomial(1, 1, Caps::ample(), make_index({1}, {0}, {0, 0}), 1.0);
    CHECK_THROWS_AS(SeriesEvaluator{bad}, std::invalid_argument);
    const SeriesEvaluator ev(cos_term({1}, {0}, {0, 0}, 1.0));
    CHECK_THROWS_AS(ev.value(Vec::Zero(3)), DimensionError);
    CHECK_THROWS_AS(integrate_flow(ev, Vec::Zero(4), 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(integrate_flow(ev, Vec::Zero(4), 1.0, -0.1), std::invalid_argument);
  }

  TEST_CASE("linear flow is exact") {
    const NormalForm nf = acceptance_normal_form();
    const TFSeries h = to_series(nf, Caps::ample());
    const Vec s0 = state({0.3, 1.1, 0.0, 0.0, 0.0, 0.0});
    const Trajectory tr = integrate_flow(h, s0, 10.0, 0.01);
    CHECK(std::abs(tr.last[0] - (0.3 + 10.0)) <= 1e-12);
    CHECK(std::abs(tr.last[1] - (1.1 + 10.0 * kGolden)) <= 1e-12);
    CHECK(tr.max_yz == 0.0);
    const double two_pi = 2.0 * std::acos(-1.0);
    CHECK(std::abs(tr.states.back()[0] - std::fmod(10.3, two_pi)) <= 1e-12);
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  }

  TEST_CASE("harmonic oscillator conserves the radius") {
    const TFSeries h = z_monomial(1, 1, {2, 0}, 0.5) + z_monomial(1, 1, {0, 2}, 0.5);
    FlowOptions opts;
    opts.record_every = 1000;
    const Trajectory tr = integrate_flow(h, state({0.0, 0.0, 1.0, 0.0}), 100.0, 1e-3, opts);
    CHECK(tr.times.size() == 101);
    CHECK(tr.energy_drift <= 1e-10);
    CHECK(tr.drift_constant == doctest::Approx(tr.energy_drift / (1e-12 * 100.0)));
    CHECK(std::abs(tr.last[2] - std::cos(100.0)) <= 1e-9);
    CHECK(std::abs(tr.last[3] + std::sin(100.0)) <= 1e-9);
    for (const Vec& s : tr.states) CHECK(std::abs(s.tail(2).norm() - 1.0) <= 1e-10);
    std::ostringstream os;
    write_trajectory(os, tr);
    CHECK(os.str().find("# t") == 0);
  }

  TEST_CASE("fourth-order convergence under step halving") {
    // Pendulum y^2/2 - cos x.
    const TFSeries h =
        TFSeries::monomial(1, 1, Caps::ample(), make_index({0}, {2}, {0, 0}), 0.5) + cos_term({1}, {0}, {0, 0}, -1.0);
    const Vec s0 = state({1.0, 0.5, 0.0, 0.0});
    const Vec a = integrate_flow(h, s0, 10.0, 0.1).last;
    const Vec b = integrate_flow(h, s0, 10.0, 0.05).last;
    const Vec c = integrate_flow(h, s0, 10.0, 0.025).last;
    const double ratio = (a - b).norm() / (b - c).norm();
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
  }

  TEST_CASE("unperturbed torus stays at y = 0, z = 0") {
    const TFSeries h = to_series(acceptance_normal_form(), Caps::ample());
    const TorusCheck tc = torus_deviation(h, acceptance_normal_form().omega, 100.0, 1e-3);
    CHECK(tc.trajectories == 16);
    CHECK(tc.deviation <= 1e-10);
    CHECK(tc.x_advance_error <= 1e-9);
    CHECK_THROWS_AS(torus_deviation(h, Vec::Zero(3), 1.0, 0.1), DimensionError);
  }

  TEST_CASE("perturbed torus deviation grows at most linearly") {
    const Schedule sc = acceptance_schedule();
    const KamState st = initial_state(acceptance_normal_form(), acceptance_perturbation(1e-6), sc);
    const KamState one = kam_step(st, sc);
    const TFSeries h = to_series(one.N, Caps::ample()) + one.P;
    const double norm = majorant_norm(one.P, {one.params.s, one.params.r});
    const TorusCheck t1 = torus_deviation(h, one.N.omega, 10.0, 1e-2, 4);
    const TorusCheck t2 = torus_deviation(h, one.N.omega, 20.0, 1e-2, 4);
    CHECK(t1.deviation > 0.0);
    CHECK(t1.deviation <= 10.0 * norm * 10.0);
    CHECK(t2.deviation <= 2.0 * 2.0 * t1.deviation);
  }

  TEST_CASE("cubic counterexample drifts off") {
    const CounterexampleReport rep = prop2_check(0.1, 1.0, 100.0);
    CHECK(rep.in_scope);
    CHECK(rep.symbolic_ok);
    CHECK(rep.symbolic_sup == doctest::Approx(-0.01));
    CHECK(rep.root_free);
    CHECK(rep.scan_min == doctest::Approx(0.01));
    CHECK(rep.drift_certified);
    CHECK(rep.slope_ok);
    CHECK(rep.v_end <= rep.v0 - 1.0);
    CHECK(rep.trajectories == 5);

    const CounterexampleReport zero = prop2_check(0.0, 1.0, 100.0);
    CHECK_FALSE(zero.in_scope);
    CHECK(zero.summary.find("out of scope") != std::string::npos);
  }

  TEST_CASE("time-one map reproduces the Lie transform") {
    Rng rng(5);
    const TFSeries h = random_series(rng, 1, 1, 8, 2, 4, Caps::ample());
    const TFSeries f = random_series(rng, 1, 1, 6, 2, 3, Caps::ample(), 0.01);
    const Caps caps{64, 40};
    const TFSeries composed = lie_transform(h, f, caps, 30);
    const SeriesEvaluator ev_h(h), ev_c(composed), ev_f(f);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec p = random_vec(rng, 4, -0.3, 0.3);
      CHECK(std::abs(ev_c.value(p) - ev_h.value(time_one_map(ev_f, p, 1e-2))) <= 1e-10);
    }
  }

  TEST_CASE("step output agrees with the transformed input") {
    const Schedule sc = acceptance_schedule();
    const KamState st = initial_state(acceptance_normal_form(), acceptance_perturbation(1e-6), sc);
    const KamState one = kam_step(st, sc);
    const ConsistencyReport rep = transform_consistency(st, one, 20, 3);
    CHECK(rep.points == 20);
    CHECK(rep.max_difference <= 1e-7);
    CHECK(rep.scale > 0.0);
    CHECK_THROWS_AS(transform_consistency(st, st, 5, 1), std::invalid_argument);
  }
}
