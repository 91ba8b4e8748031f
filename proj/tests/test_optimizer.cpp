#include <cmath>

#include "doctest.h"
#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/models.hpp"
#include "rbl/optimizer.hpp"

using namespace rbl;

namespace {

double circular_distance(double x, double y) {
    const double d = wrap_two_pi(x - y);
    return std::min(d, kTwoPi - d);
}

std::size_t idx(Variable v) { return static_cast<std::size_t>(v); }

}  // namespace

TEST_CASE("quantum CHSH minimum is -2 sqrt 2") {
    ObjectiveSpec spec;
    spec.free = {Variable::A, Variable::A2, Variable::B, Variable::B2};
    const auto opt = optimize(spec, 2);
    CHECK(std::abs(opt.value + 2 * std::sqrt(2.0)) < 1e-6);
    CHECK(opt.settings[idx(Variable::A)] == 0.0);
    // neighbouring settings a, b, a', b' (and b' back to a) sit π/4 apart, up to sign
    const auto& s = opt.settings;
    for (auto [x, y] : {std::pair{Variable::A, Variable::B}, {Variable::A, Variable::B2},
                        {Variable::A2, Variable::B}, {Variable::A2, Variable::B2}}) {
        const double d = circular_distance(s[idx(x)], s[idx(y)]);
        CHECK(std::min(std::abs(d - kPi / 4), std::abs(d - 3 * kPi / 4)) < 1e-3);
    }
    // re-evaluating rotated settings gives the same value
    const QuantumSinglet q;
    Angles shifted = s;
    for (auto& x : shifted) x += 1.234;
    CHECK(evaluate_objective(spec, q, shifted) == doctest::Approx(opt.value).epsilon(1e-12));
}

TEST_CASE("quantum CHSH maximum is +2 sqrt 2") {
    ObjectiveSpec spec;
    spec.direction = Direction::Maximize;
    spec.free = {Variable::A, Variable::A2, Variable::B, Variable::B2};
    CHECK(std::abs(optimize(spec, 2).value - 2 * std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("hardy same-retarded CHSH saturates -2 at a' = b, b' = a") {
    ObjectiveSpec spec;
    spec.model = "hardy-singlet";
    spec.kind = InequalityKind::SameRetardedChsh;
    spec.free = {Variable::A, Variable::A2, Variable::B, Variable::B2};
    const auto opt = optimize(spec, 2);
    CHECK(std::abs(opt.value + 2.0) < 1e-6);
    const auto& s = opt.settings;
    CHECK(circular_distance(s[idx(Variable::A2)], s[idx(Variable::B)]) < 1e-3);
    CHECK(circular_distance(s[idx(Variable::B2)], s[idx(Variable::A)]) < 1e-3);
}

TEST_CASE("flat objective returns its constant value") {
    // retarded angles do not enter the quantum expression
    ObjectiveSpec spec;
    spec.kind = InequalityKind::RetardedChsh;
    spec.pattern = RetardedPattern::Free;
    spec.free = {Variable::AR};
    spec.values = {0.0, kPi / 2, kPi / 4, -kPi / 4, 0, 0, 0, 0};
    const QuantumSinglet q;
    const double expected = evaluate_objective(spec, q, spec.values);
    CHECK(optimize(spec, 1).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reported value matches the reported settings") {
    ObjectiveSpec spec;
    spec.model = "hardy-singlet";
    spec.kind = InequalityKind::RetardedChsh;
    spec.pattern = RetardedPattern::Free;
    spec.values = {0.1, 0.7, 1.3, 2.9, 0.2, 0.4, 0.6, 0.8};
    spec.free = {Variable::A, Variable::BR, Variable::B2R};
    const HardySingletModel m;
    const auto opt = optimize(spec, 1);
    CHECK(evaluate_objective(spec, m, opt.settings) == doctest::Approx(opt.value).epsilon(1e-12));
    CHECK(opt.value >= -2.0 - 1e-12);
}

TEST_CASE("retarded CH on the quantum model") {
    ObjectiveSpec spec;
    spec.kind = InequalityKind::RetardedCh;
    spec.free = {Variable::A, Variable::A2, Variable::B, Variable::B2};
    CHECK(std::abs(optimize(spec, 2).value + (1 + std::sqrt(2.0)) / 2) < 1e-6);
}

TEST_CASE("spec validation and parsing") {
    ObjectiveSpec spec;
    CHECK_THROWS_AS(spec.validate(), InvalidArgumentError);  // no free variables
    spec.free = {Variable::A, Variable::A};
    CHECK_THROWS_AS(spec.validate(), InvalidArgumentError);
    spec.free = {Variable::AR};  // plain CHSH has no free retarded settings
    CHECK_THROWS_AS(spec.validate(), InvalidArgumentError);
    CHECK(parse_variable("b2r") == Variable::B2R);
    CHECK_THROWS_AS(parse_variable("z"), InvalidArgumentError);
    CHECK(parse_inequality_kind("same_retarded_chsh") == InequalityKind::SameRetardedChsh);
    CHECK(to_string(RetardedPattern::Tied) == "tied");
}
