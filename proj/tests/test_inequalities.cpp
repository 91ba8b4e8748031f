#include <cmath>

#include "doctest.h"
#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/estimation.hpp"
#include "rbl/inequalities.hpp"
#include "rbl/models.hpp"

using namespace rbl;

namespace {

const SettingLabel a("a", kPi / 2), a2("a'", 0.0), b("b", -kPi / 4), b2("b'", kPi / 4);
const double kSqrt2 = std::sqrt(2.0);

CorrelationInput constant_input(const Octuple& s, double e) {
    CorrelationInput in;
    for (const auto& k : {CellKey(s.a2, s.b2, s.a2_r, s.b2_r), CellKey(s.a2, s.b, s.a_r, s.b2_r),
                          CellKey(s.a, s.b2, s.a2_r, s.b_r), CellKey(s.a, s.b, s.a_r, s.b_r)}) {
        in.cells[k] = Estimate{e, 0.0, 0, true};
    }
    return in;
}

}  // namespace

TEST_CASE("retarded CHSH with all correlations zero") {
    const auto s = Octuple::tied(a, a2, b, b2);
    const auto r = retarded_chsh(constant_input(s, 0.0), s);
    CHECK(r.value == 0.0);
    CHECK(r.verdict == Verdict::Satisfied);
}

TEST_CASE("hardy at the reference quartet with retarded pair fixed at (a, b)") {
    const HardySingletModel m;
    Octuple s = Octuple::tied(a, a2, b, b2);
    s.a2_r = a;
    s.b2_r = b;
    const auto r = retarded_chsh(analytic_chsh_input(m, s), s);
    CHECK(std::abs(r.value + kSqrt2) < 1e-12);
    CHECK(r.verdict == Verdict::Satisfied);

    const auto same = same_retarded_chsh(analytic_chsh_input(m, Octuple::same_retarded(a, a2, b, b2)),
                                         a, a2, b, b2);
    CHECK(std::abs(same.value + kSqrt2) < 1e-12);
}

TEST_CASE("quantum at the reference quartet violates CHSH") {
    const QuantumSinglet q;
    const auto s = Octuple::tied(a, a2, b, b2);
    const auto r = retarded_chsh(analytic_chsh_input(q, s), s);
    CHECK(std::abs(r.value + 2 * kSqrt2) < 1e-12);
    CHECK(r.verdict == Verdict::Violated);
    CHECK(r.side == BoundSide::Lower);
    CHECK(std::isinf(r.margin_sigma));
}

TEST_CASE("hardy saturates -2 at a' = b, b' = a") {
    const HardySingletModel m;
    const SettingLabel x("a", 0.0), x2("a'", kPi / 2), y("b", kPi / 2), y2("b'", 0.0);
    const auto r = same_retarded_chsh(
        analytic_chsh_input(m, Octuple::same_retarded(x, x2, y, y2)), x, x2, y, y2);
    CHECK(std::abs(r.value + 2.0) < 1e-12);
    CHECK(r.verdict == Verdict::Satisfied);
}

TEST_CASE("both-equal reduction") {
    CorrelationInput in;
    in.cells[CellKey(a, b, a, b)] = Estimate{-1.0, 0.0, 0, true};
    auto r = both_equal_reduction(in, a, b);
    CHECK(r.value == -2.0);
    CHECK(r.verdict == Verdict::Satisfied);

    const QuantumSinglet q;
    const SettingLabel same("b", kPi / 2);
    const auto qs = Octuple::tied(a, a, same, same);
    CHECK(both_equal_reduction(analytic_chsh_input(q, qs), a, same).value == doctest::Approx(-2.0));

    const HardySingletModel m;
    const SettingLabel ortho("b", 0.0);
    const auto hs = Octuple::tied(a, a, ortho, ortho);
    CHECK(std::abs(both_equal_reduction(analytic_chsh_input(m, hs), a, ortho).value) < 1e-12);
}

TEST_CASE("one-end-equal with retarded-independent correlations gives 2E(a,b')") {
    const QuantumSinglet q;
    Rng rng(17);
    for (int k = 0; k < 50; ++k) {
        const SettingLabel x("a", rng.uniform(0, kTwoPi)), y("b", rng.uniform(0, kTwoPi)),
            y2("b'", rng.uniform(0, kTwoPi));
        Octuple s = Octuple::tied(x, x, y, y2);
        const auto r = one_end_equal_chsh(analytic_chsh_input(q, s), x, y, y2, y, y2);
        CHECK(std::abs(r.value - 2 * quantum_e(x.angle, y2.angle)) < 1e-12);
        CHECK(r.verdict == Verdict::Satisfied);
    }
    const SettingLabel x("a", 0.0), y("b", kPi), y2("b'", 0.0);
    const auto r = one_end_equal_chsh(analytic_chsh_input(q, Octuple::tied(x, x, y, y2)), x, y,
                                      y2, y, y2);
    CHECK(r.value == doctest::Approx(-2.0));
    CHECK(r.verdict == Verdict::Satisfied);
}

TEST_CASE("averaged CHSH") {
    const HardySingletModel m;
    const QuantumSinglet q;
    const auto all = analytic_input(m, {a, a2}, {b, b2});
    SUBCASE("point mass reduces to fixed retarded pair") {
        RetardedWeights w{{{"a", "b"}, 1.0}};
        const auto av = averaged_chsh(all, w, a, a2, b, b2, true);
        const auto fixed = same_retarded_chsh(all, a, a2, b, b2);
        CHECK(av.value == doctest::Approx(fixed.value).epsilon(1e-14));
        REQUIRE(av.settings_independent.has_value());
        CHECK(*av.settings_independent);
    }
    SUBCASE("uniform weights keep hardy inside the bound") {
        RetardedWeights w;
        for (auto x : {"a", "a'"})
            for (auto y : {"b", "b'"}) w[{x, y}] = 0.25;
        CHECK(std::abs(averaged_chsh(all, w, a, a2, b, b2, true).value) <= 2.0);
        const auto qall = analytic_input(q, {a, a2}, {b, b2});
        CHECK(averaged_chsh(qall, w, a, a2, b, b2, true).value ==
              doctest::Approx(-2 * kSqrt2).epsilon(1e-12));
    }
}

TEST_CASE("missing and insufficient cells") {
    const auto s = Octuple::tied(a, a2, b, b2);
    CorrelationInput empty;
    CHECK_THROWS_AS(retarded_chsh(empty, s), MissingCellError);
    auto in = constant_input(s, 0.1);
    in.cells.begin()->second.sufficient = false;
    CHECK_THROWS_AS(retarded_chsh(in, s), InsufficientDataError);
}

TEST_CASE("sampled verdict bands") {
    const auto s = Octuple::tied(a, a2, b, b2);
    auto in = constant_input(s, -0.5005);
    in.source = Source::MonteCarlo;
    for (auto& [k, e] : in.cells) e.standard_error = 0.01;
    // 2E = -1.001
    CHECK(retarded_chsh(in, s).verdict == Verdict::Satisfied);

    auto edge = constant_input(s, 0.0);
    edge.source = Source::MonteCarlo;
    edge.cells[CellKey(a2, b2, a2, b2)] = Estimate{1.0, 0.01, 100, true};
    edge.cells[CellKey(a2, b, a, b2)] = Estimate{0.6, 0.01, 100, true};
    edge.cells[CellKey(a, b2, a2, b)] = Estimate{0.42, 0.01, 100, true};
    edge.cells[CellKey(a, b, a, b)] = Estimate{0.0, 0.01, 100, true};
    // value 2.02, SE = 0.02: excess 0.02 <= 3 SE
    const auto r = retarded_chsh(edge, s);
    CHECK(r.value == doctest::Approx(2.02));
    CHECK(r.combined_se == doctest::Approx(0.02));
    CHECK(r.verdict == Verdict::Inconclusive);
    CHECK(r.margin_sigma == doctest::Approx(1.0));

    edge.cells[CellKey(a, b, a, b)] = Estimate{-0.2, 0.01, 100, true};
    CHECK(retarded_chsh(edge, s).verdict == Verdict::Violated);
}

TEST_CASE("repeated cells combine coherently in the standard error") {
    // both-equal: 2 E(a,b|a,b); SE doubles rather than adding in quadrature
    CorrelationInput in;
    in.source = Source::MonteCarlo;
    in.cells[CellKey(a, b, a, b)] = Estimate{0.3, 0.05, 400, true};
    const auto r = both_equal_reduction(in, a, b);
    CHECK(r.combined_se == doctest::Approx(0.1));
}

TEST_CASE("CHSH sign identity") {
    CHECK(chsh_expression(1, 1, 1, 1) == 2);
    CHECK(chsh_expression(1, -1, 1, -1) == -2);
    const auto check = chsh_identity_check();
    CHECK(check.pass);
    CHECK(check.cases == 16);
}

TEST_CASE("CH corner identity") {
    CHECK(ch_expression(1, 1, 1, 1) == 0);
    CHECK(ch_expression(0, 0, 0, 0) == 0);
    const auto check = ch_identity_check(200000, 4);
    CHECK(check.pass);
    CHECK(check.cases == 200000);
}

TEST_CASE("retarded CH") {
    const auto s = Octuple::tied(a, a2, b, b2);
    SUBCASE("all probabilities zero") {
        ProbabilityInput p;
        for (const auto& k : {CellKey(a2, b2, a2, b2), CellKey(a2, b, a, b2), CellKey(a, b2, a2, b),
                              CellKey(a, b, a, b)}) {
            p.joint[k] = Estimate{};
        }
        for (auto id : {"a", "a'"}) p.p1[id] = Estimate{};
        for (auto id : {"b", "b'"}) p.p2[id] = Estimate{};
        const auto r = retarded_ch(p, s);
        CHECK(r.value == 0.0);
        CHECK(r.verdict == Verdict::Satisfied);
    }
    SUBCASE("quantum quartet") {
        const QuantumSinglet q;
        const auto r = retarded_ch(analytic_ch_input(q, s), s);
        CHECK(std::abs(r.value + (1 + kSqrt2) / 2) < 1e-12);
        CHECK(r.verdict == Verdict::Violated);
        CHECK(r.side == BoundSide::Lower);
    }
    SUBCASE("CH tracks CHSH for zero-mean outcomes") {
        const HardySingletModel m;
        Rng rng(23);
        for (int k = 0; k < 30; ++k) {
            Octuple o = Octuple::tied(SettingLabel("a", rng.uniform(0, kTwoPi)),
                                      SettingLabel("a'", rng.uniform(0, kTwoPi)),
                                      SettingLabel("b", rng.uniform(0, kTwoPi)),
                                      SettingLabel("b'", rng.uniform(0, kTwoPi)));
            o.a_r = SettingLabel("ar", rng.uniform(0, kTwoPi));
            o.b2_r = SettingLabel("b2r", rng.uniform(0, kTwoPi));
            const double chsh = retarded_chsh(analytic_chsh_input(m, o), o).value;
            const double ch = retarded_ch(analytic_ch_input(m, o), o).value;
            CHECK(ch == doctest::Approx((chsh - 2) / 4).epsilon(1e-12));
        }
    }
    SUBCASE("cannot be violated with a' = a or b' = b on a grid") {
        const QuantumSinglet q;
        for (int i = 0; i < 24; ++i) {
            for (int j = 0; j < 24; ++j) {
                const SettingLabel x("a", i * kPi / 12), y("b", j * kPi / 12),
                    y2("b'", (i + j) * kPi / 17);
                const auto o = Octuple::tied(x, x, y, y2);
                const auto r = retarded_ch(analytic_ch_input(q, o), o);
                CHECK(r.value >= -1 - 1e-12);
                CHECK(r.value <= 1e-12);
            }
        }
    }
}
