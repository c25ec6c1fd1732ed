#include <catch2/catch_amalgamated.hpp>

#include "ndwp/ramp.hpp"

using namespace ndwp;
using Catch::Approx;
namespace dyn = dynamics;

TEST_CASE("sin^2 turn-on profile", "[ramp]") {
    const auto s = dyn::schedule_sin2_turn_on(0.015, 600.0, 0.003);
    CHECK(s.f0_at(0.0) == 0.0);
    CHECK(s.f0_at(600.0) == Approx(0.015).epsilon(1e-14));
    CHECK(s.f0_at(300.0) == Approx(0.0075).epsilon(1e-13));  // sin^2(pi/4) = 1/2
    CHECK(s.fs0_at(123.0) == Approx(0.003));
    // quadratic start: F0(t) ~ t^2
    const double a = s.f0_at(1.0), b = s.f0_at(2.0);
    CHECK(b / a == Approx(4.0).epsilon(1e-4));
    CHECK_THROWS_AS(dyn::schedule_sin2_turn_on(0.015, 0.0, 0.003), ConfigError);
}

TEST_CASE("piecewise static turn-off", "[ramp]") {
    const auto s = dyn::schedule_circularize(0.015);
    CHECK(s.fs0_at(0.0) == Approx(0.003));
    CHECK(s.fs0_at(2400.0) == Approx(0.0024));
    CHECK(s.fs0_at(3000.0) == Approx(0.0).margin(1e-15));
    CHECK(s.fs0_at(1200.0) == Approx(0.0027).epsilon(1e-13));  // midpoint of first leg
    CHECK(s.f0_at(1700.0) == Approx(0.015));
    CHECK(s.duration() == Approx(3000.0));

    // scaled profile is n0-independent by construction: same breakpoints
    const auto g = dyn::schedule_static_turn_off({{0.0, 0.003}, {2400.0, 0.0024}, {3000.0, 0.0}}, 0.01);
    CHECK(g.fs0_at(2400.0) == Approx(0.0024));

    CHECK_THROWS_AS(dyn::schedule_static_turn_off({{0.0, 0.003}, {0.0, 0.002}}, 0.01), ConfigError);
    CHECK_THROWS_AS(dyn::schedule_static_turn_off({{0.0, 0.003}}, 0.01), ConfigError);
}

TEST_CASE("schedule validation catches gaps and jumps", "[ramp]") {
    dyn::RampSchedule bad;
    bad.segments.push_back({dyn::SegmentKind::linear, dyn::RampField::f0, 0.0, 10.0, 0.0, 0.01});
    bad.segments.push_back({dyn::SegmentKind::linear, dyn::RampField::f0, 10.0, 20.0, 0.02, 0.0});
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    dyn::RampSchedule neg;
    neg.segments.push_back({dyn::SegmentKind::linear, dyn::RampField::fs0, 0.0, 10.0, 0.003, -0.001});
    CHECK_THROWS_AS(neg.validate(), ConfigError);

    dyn::RampSchedule empty;
    CHECK_THROWS_AS(empty.validate(), ConfigError);
}
