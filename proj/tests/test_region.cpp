#include "kamdeg/region.hpp"

#include <doctest.h>

#include <cmath>

using namespace kamdeg;

namespace {

ParamBox unit_square_box() { return {Vec::Constant(2, 1.0), Vec::Constant(2, 2.0)}; }

// omega(xi) = (1, xi^2) with one parameter.
OmegaMap parabola_map() { return OmegaMap(1, {{{1.0, {0}}}, {{1.0, {2}}}}); }

constexpr double kStripArea = 1.0 - 0.975 * 0.975;  // |xi1 - xi2| <= 0.025 on [1,2]^2

}  // namespace

TEST_SUITE("region") {
  TEST_CASE("polynomial frequency map and its derivatives") {
    const OmegaMap w = parabola_map();
    Vec xi(1);
    xi << 1.5;
    CHECK(w(xi)[1] == doctest::Approx(2.25));
    CHECK(w.derivative(xi, {1})[1] == doctest::Approx(3.0));
    CHECK(w.derivative(xi, {2})[1] == doctest::Approx(2.0));
    CHECK(w.derivative(xi, {3})[1] == 0.0);
    CHECK(w.derivative(xi, {1})[0] == 0.0);
    CHECK_THROWS_AS(OmegaMap(2, {{{1.0, {1}}}}), DimensionError);
    CHECK_THROWS_AS(w(Vec::Zero(2)), DimensionError);
  }

  TEST_CASE("A1 on basic maps") {
    const A1Result id = check_A1(unit_square_box(), OmegaMap::identity(2), 1, 11);
    CHECK(id.pass);
    CHECK(id.points == 121);
    // Without derivatives the diagonal is a zero of <k,xi> for k = (1,-1).
    const A1Result id0 = check_A1(unit_square_box(), OmegaMap::identity(2), 0, 11);
    CHECK_FALSE(id0.pass);
    REQUIRE_FALSE(id0.violations.empty());
    CHECK(std::abs(id0.violations.front().xi[0] - id0.violations.front().xi[1]) < 1e-12);

    Vec w(2);
    w << 1.0, 1.0;
    const A1Result flat = check_A1(unit_square_box(), OmegaMap::constant(w, 2), 3, 5);
    CHECK_FALSE(flat.pass);
    CHECK(flat.violations.front().k == std::vector<int>{1, -1});

    const ParamBox line{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
    CHECK(check_A1(line, parabola_map(), 1, 33).pass);
    CHECK_THROWS_AS(check_A1(unit_square_box(), parabola_map(), 1, 5), DimensionError);
  }

  TEST_CASE("invalid boxes") {
    ParamBox bad{Vec::Constant(2, 1.0), Vec::Constant(2, 1.0)};
    CHECK_THROWS_AS(check_box(bad), std::invalid_argument);
    CHECK_THROWS_AS(check_box(ParamBox{Vec::Constant(2, 1.0), Vec::Constant(3, 2.0)}), DimensionError);
  }

  TEST_CASE("zero gamma keeps every sample") {
    const FilterResult f = filter_params(unit_square_box(), OmegaMap::identity(2), nullptr, 0.0, 2.0, 0, 8, 3, 2000, 1);
    CHECK(f.excluded == 0);
    CHECK(f.samples.size() == 2000);
  }

  TEST_CASE("single strip matches its area") {
    const FilterResult f =
        filter_params(unit_square_box(), OmegaMap::identity(2), nullptr, 0.1, 2.0, 1, 2, 3, 10000, 7);
    CHECK(std::abs(f.fraction() - kStripArea) <= 3.0 * std::sqrt(kStripArea * (1 - kStripArea) / 10000));
    REQUIRE(f.exclusions.size() == 1);
    CHECK(f.exclusions.begin()->first == std::vector<int>{1, -1});
    for (std::size_t i = 0; i < f.samples.size(); ++i)
      CHECK(static_cast<bool>(f.survives[i]) == (std::abs(f.samples[i][0] - f.samples[i][1]) > 0.025));
  }

  TEST_CASE("empty window keeps every sample") {
    const FilterResult f = filter_params(unit_square_box(), OmegaMap::identity(2), nullptr, 0.5, 2.0, 8, 8, 3, 1000, 1);
    CHECK(f.excluded == 0);
    CHECK_THROWS_AS(filter_params(unit_square_box(), OmegaMap::identity(2), nullptr, 0.5, 2.0, 0, 8, 3, 10, 1),
                    std::invalid_argument);
  }

  TEST_CASE("survivors shrink as windows accumulate") {
    const auto pts = sample_box(unit_square_box(), 3000, 5);
    const FilterResult a = filter_params(pts, OmegaMap::identity(2), nullptr, 0.5, 2.0, 0, 8, 3);
    const FilterResult b = filter_params(pts, OmegaMap::identity(2), nullptr, 0.375, 2.0, 8, 16, 3);
    int contained = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const bool step1 = a.survives[i], step2 = step1 && b.survives[i];
      contained += !step2 || step1;
    }
    CHECK(contained == 3000);
    CHECK(sample_box(unit_square_box(), 10, 5)[3] == pts[3]);
  }

  TEST_CASE("Hessian coupling only adds exclusions") {
    const auto pts = sample_box(unit_square_box(), 1000, 9);
    const HessianMap zero = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
    const HessianMap harmonic = [](const Vec&) { return Mat(0.7 * Mat::Identity(2, 2)); };
    const FilterResult s = filter_params(pts, OmegaMap::identity(2), nullptr, 0.3, 2.0, 0, 6, 3);
    const FilterResult z = filter_params(pts, OmegaMap::identity(2), zero, 0.3, 2.0, 0, 6, 3);
    const FilterResult h = filter_params(pts, OmegaMap::identity(2), harmonic, 0.3, 2.0, 0, 6, 3);
    CHECK(z.survives == s.survives);
    CHECK(h.excluded > s.excluded);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((h.survives[i] <= s.survives[i]));
  }

  TEST_CASE("resonance zone predicate") {
    const ResonanceZone zone = resonance_zone({1, -1}, 0, OmegaMap::identity(2), nullptr, 0.1, 2.0, 3);
    Vec on(2), off(2);
    on << 1.5, 1.51;
    off << 1.5, 1.6;
    CHECK(zone.contains(on));
    CHECK_FALSE(zone.contains(off));
    CHECK(zone.kind == ZoneKind::scalar);
  }

  TEST_CASE("measure estimate") {
    ScheduleConfig cfg;
    cfg.m = 3;
    cfg.tau = 2.0;
    const auto rows =
        measure_estimate(unit_square_box(), OmegaMap::identity(2), nullptr, cfg, {1e-4, 1e-6, 1e-8}, 3, 10000, 1);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].fraction <= rows[0].fraction);
    CHECK(rows[2].fraction <= rows[1].fraction);
    CHECK(rows[0].half_width > 0.0);
    CHECK(rows[0].reference > 0.0);

    // gamma0 = 0.1 with a single window (0,2]: only the diagonal strip is cut.
    ScheduleConfig one = cfg;
    one.k_base = 2;
    const auto strip = measure_estimate(unit_square_box(), OmegaMap::identity(2), nullptr, one,
                                        {std::pow(0.1, 192.0)}, 1, 10000, 3);
    CHECK(strip[0].gamma0 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::abs(strip[0].fraction - kStripArea) <= 3.0 * std::sqrt(kStripArea * (1 - kStripArea) / 10000));

    CHECK_THROWS_AS(measure_estimate(unit_square_box(), OmegaMap::identity(2), nullptr, cfg, {1e-6}, 1, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(measure_estimate(unit_square_box(), OmegaMap::identity(2), nullptr, cfg, {1e-6}, 0, 100, 1),
                    std::invalid_argument);
  }
}
