#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/spacetime.hpp"

using namespace rbl;

namespace {

const SettingLabel A("a", kPi / 2);
const SettingLabel A2("a'", 0.0);

Geometry geom(double L, double c) {
    Geometry g;
    g.separation = L;
    g.signal_speed = c;
    return g;
}

}  // namespace

TEST_CASE("constant schedule holds its label") {
    const auto s = ScheduleBuilder(1, 0.0, A).build();
    CHECK(s.value_at(7.0) == A);
    CHECK(s.value_at(0.0) == A);
    CHECK_THROWS_AS(s.value_at(-0.1), UndefinedTimeError);
}

TEST_CASE("base switch is right-continuous") {
    const auto s = ScheduleBuilder(1, 0.0, A).switch_to(5.0, A2).build();
    CHECK(s.value_at(5.0) == A2);
    CHECK(s.value_at(std::nextafter(5.0, 0.0)) == A);
}

TEST_CASE("intervention takes effect at decision plus delay") {
    const auto s = ScheduleBuilder(1, 0.0, A).intervene(4.0, 1.0, A2, "ext").build();
    CHECK(s.value_at(4.5) == A);
    CHECK(s.value_at(5.0) == A2);
    REQUIRE(s.interventions().size() == 1);
    CHECK(s.interventions()[0].effect_time() == 5.0);
    CHECK(s.interventions()[0].source_tag == "ext");
}

TEST_CASE("intervention beats a base switch at the same instant") {
    const SettingLabel a3("a''", 1.0);
    const auto s =
        ScheduleBuilder(1, 0.0, A).switch_to(3.0, A2).intervene(2.0, 1.0, a3, "x").build();
    CHECK(s.value_at(3.0) == a3);
    // a later base switch overrides the intervention again
    const auto t = ScheduleBuilder(1, 0.0, A).intervene(1.0, 0.0, a3, "x").switch_to(2.0, A2).build();
    CHECK(t.value_at(1.5) == a3);
    CHECK(t.value_at(2.0) == A2);
}

TEST_CASE("builder rejects out-of-order base switches") {
    ScheduleBuilder b(1, 0.0, A);
    b.switch_to(2.0, A2);
    CHECK_THROWS_AS(b.switch_to(2.0, A), InvalidArgumentError);
    CHECK_THROWS_AS(ScheduleBuilder(1, 1.0, A).switch_to(0.5, A2), InvalidArgumentError);
}

TEST_CASE("palette rejects conflicting angles") {
    Palette p;
    CHECK(p.intern(A) == 0);
    CHECK(p.intern(SettingLabel("a", kPi / 2 + kTwoPi)) == 0);
    CHECK_THROWS_AS(p.intern(SettingLabel("a", 0.3)), InvalidArgumentError);
    CHECK_FALSE(p.find("b").has_value());
}

TEST_CASE("setting angles wrap into [0, 2pi)") {
    CHECK(SettingLabel("b", -kPi / 4).angle == doctest::Approx(7 * kPi / 4));
    CHECK(wrap_two_pi(kTwoPi) == 0.0);
    CHECK(parse_angle("-pi/4") == -kPi / 4);
    CHECK(parse_angle("3pi/4") == 3 * kPi / 4);
    CHECK(parse_angle("3*pi/2") == 3 * kPi / 2);
    CHECK(parse_angle("0.25") == 0.25);
    CHECK_THROWS_AS(parse_angle("pi/"), InvalidArgumentError);
    CHECK_THROWS_AS(parse_angle("deg"), InvalidArgumentError);
}

TEST_CASE("simple retarded setting") {
    const auto constant = ScheduleBuilder(1, 0.0, A).build();
    CHECK(simple_retarded(constant, 3.3, geom(1, 1)) == A);

    const auto s = ScheduleBuilder(1, 0.0, A).switch_to(5.0, A2).build();
    CHECK(simple_retarded(s, 6.0, geom(2, 1)) == A);
    CHECK(simple_retarded(s, 7.0, geom(2, 1)) == A2);
    CHECK_THROWS_AS(simple_retarded(s, 1.0, geom(2, 1)), UndefinedTimeError);
}

TEST_CASE("periodic base with L/c equal to the period: retarded equals actual") {
    const double T = 1.0;
    ScheduleBuilder b(1, 0.0, A);
    for (int k = 1; k < 40; ++k) b.switch_to(k * T / 2, k % 2 ? A2 : A);
    const auto s = b.build();
    for (double t = 1.01; t < 19.0; t += 0.173) {
        CHECK(simple_retarded(s, t, geom(T, 1)) == s.value_at(t));
    }
}

TEST_CASE("predictive retarded setting") {
    const auto g = geom(2, 1);
    SUBCASE("deterministic base is predicted exactly") {
        ScheduleBuilder b(1, 0.0, A);
        for (int k = 1; k < 20; ++k) b.switch_to(0.5 * k, k % 2 ? A2 : A);
        const auto s = b.build();
        for (double t = 2.1; t < 9.0; t += 0.31) {
            CHECK(predictive_retarded(s, t, t, g) == s.value_at(t));
            CHECK(predictive_retarded(s, t, t + 0.2, g) == s.value_at(t));
        }
    }
    SUBCASE("with a constant base the definitions coincide at t1 = t2") {
        ScheduleBuilder b(1, 0.0, A);
        for (int k = 0; k < 30; ++k) b.intervene(0.3 * k, 0.0, k % 2 ? A : A2, "rng");
        const auto s = b.build();
        for (double t = 2.05; t < 9.0; t += 0.29) {
            CHECK(predictive_retarded(s, t, t, g) == simple_retarded(s, t, g));
        }
    }
    SUBCASE("late decisions are dropped") {
        const auto s = ScheduleBuilder(1, 0.0, A).intervene(5.5, 0.0, A2, "late").build();
        CHECK(predictive_retarded(s, 6.0, 6.0, g) == A);
        CHECK(s.value_at(6.0) == A2);
    }
    SUBCASE("decision exactly at the cutoff is kept") {
        const auto s = ScheduleBuilder(1, 0.0, A).intervene(4.0, 1.0, A2, "edge").build();
        CHECK(predictive_retarded(s, 6.0, 6.0, g) == A2);
    }
    SUBCASE("delay beyond L/c makes predictive equal actual") {
        ScheduleBuilder b(1, 0.0, A);
        for (int k = 0; k < 50; ++k) b.intervene(0.17 * k, 1.5 * g.light_delay(), k % 2 ? A : A2, "d");
        const auto s = b.build();
        for (double t = 2.5; t < 9.0; t += 0.07) {
            CHECK(predictive_retarded(s, t, t, g) == s.value_at(t));
        }
    }
    SUBCASE("cutoff before the start is undefined") {
        const auto s = ScheduleBuilder(1, 1.0, A).build();
        CHECK_THROWS_AS(predictive_retarded(s, 2.0, 2.0, g), UndefinedTimeError);
    }
}

TEST_CASE("geometry validation") {
    CHECK_NOTHROW(geom(1, 1).validate());
    CHECK_THROWS_AS(geom(0, 1).validate(), InvalidArgumentError);
    CHECK_THROWS_AS(geom(1, -1).validate(), InvalidArgumentError);
    Geometry late = geom(1, 1);
    late.t0 = 1.5;
    CHECK_THROWS_AS(late.validate(), InvalidArgumentError);
}

TEST_CASE("trial classification") {
    const SettingLabel b("b", 0.1), b2("b'", 0.2);
    CHECK(classify_trial(A, A, b, b) == EqualityClass::BothEqual);
    CHECK(classify_trial(A, A, b, b2) == EqualityClass::Only1Equal);
    CHECK(classify_trial(A, A2, b, b) == EqualityClass::Only2Equal);
    CHECK(classify_trial(A, A2, b, b2) == EqualityClass::NeitherEqual);
    CHECK(to_string(EqualityClass::BothEqual) == "both-equal");
}

TEST_CASE("intervention CSV round trip") {
    Palette p1({A, A2}), p2({SettingLabel("b", 0.0)});
    std::vector<Intervention> ivs{{1, 3.0, 0.0, A2, "qrng, run 7"},
                                  {2, 4.25, 0.5, SettingLabel("b", 0.0), ""}};
    std::stringstream ss;
    write_interventions_csv(ss, ivs);
    const auto back = read_interventions_csv(ss, p1, p2);
    REQUIRE(back.size() == 2);
    CHECK(back[0].new_label == A2);
    CHECK(back[0].source_tag == "qrng, run 7");
    CHECK(back[1].station == 2);
    CHECK(back[1].delay == 0.5);

    std::stringstream bad("station,decision_time,delay,label,source_tag\n1,2.0,0,zzz,x\n");
    CHECK_THROWS_AS(read_interventions_csv(bad, p1, p2), Error);
}
