#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/estimation.hpp"
#include "rbl/inequalities.hpp"
#include "rbl/models.hpp"

using namespace rbl;

namespace {

// A ≡ +1, B ≡ +1 on the unit interval.
class ConstantModel final : public DeterministicLhv {
public:
    ConstantModel() : DeterministicLhv(HiddenSpace::interval(0.0, 1.0)) {}
    std::string_view name() const noexcept override { return "constant"; }
    int outcome_a(double, double, double) const override { return 1; }
    int outcome_b(double, double, double) const override { return 1; }
};

TrialLog tiny_log(const std::vector<std::pair<int, int>>& outcomes) {
    TrialLog log;
    log.station1.intern(SettingLabel("a", 0.0));
    log.station2.intern(SettingLabel("b", 1.0));
    std::uint64_t id = 0;
    for (auto [x, y] : outcomes) {
        TrialRecord r;
        r.trial_id = id++;
        r.outcome_a = static_cast<std::int8_t>(x);
        r.outcome_b = static_cast<std::int8_t>(y);
        log.records.push_back(r);
    }
    return log;
}

}  // namespace

TEST_CASE("quadrature") {
    const HardySingletModel m;
    CHECK(quadrature_e(m, 0.4, 0.4, 0.4, 0.4) == doctest::Approx(-1.0).epsilon(1e-3));
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        const double a = rng.uniform(0, kTwoPi), b = rng.uniform(0, kTwoPi),
                     ar = rng.uniform(0, kTwoPi), br = rng.uniform(0, kTwoPi);
        CHECK(std::abs(quadrature_e(m, a, b, ar, br) - hardy_closed_form_e(a, b, ar, br)) <= 1e-4);
    }
    CHECK(quadrature_e(ConstantModel{}, 0, 0, 0, 0, 1000) == 1.0);
    CHECK_THROWS_AS(quadrature_e(QuantumSinglet{}, 0, 0, 0, 0), UnsupportedModelError);
    CHECK_THROWS_AS(quadrature_e(m, 0, 0, 0, 0, 10), InvalidArgumentError);
}

TEST_CASE("Monte Carlo correlation") {
    const HardySingletModel m;
    SUBCASE("deterministic perfect correlation") {
        const auto e = mc_e(m, 0.0, kPi, 0.0, kPi, 10000, 1);
        CHECK(e.estimate == 1.0);
        CHECK(e.standard_error == 0.0);
        CHECK(e.count == 10000);
    }
    SUBCASE("reference quartet cells") {
        const SettingLabel a("a", kPi / 2), a2("a'", 0.0), b("b", -kPi / 4), b2("b'", kPi / 4);
        const auto s = Octuple::tied(a, a2, b, b2);
        const auto in = mc_chsh_input(m, s, 1000000, 77);
        CHECK(in.source == Source::MonteCarlo);
        for (const auto& [k, est] : in.cells) {
            const auto pa = k.a == "a" ? a : a2;
            const auto pb = k.b == "b" ? b : b2;
            const auto pr = k.a_r == "a" ? a : a2;
            const auto qr = k.b_r == "b" ? b : b2;
            const double truth = hardy_closed_form_e(pa.angle, pb.angle, pr.angle, qr.angle);
            CHECK(std::abs(est.value - truth) < 5 * est.standard_error);
        }
    }
    SUBCASE("quantum zero correlation point") {
        const auto e = mc_e(QuantumSinglet{}, kPi / 2, 0.0, 0, 0, 1000000, 8);
        CHECK(std::abs(e.estimate) < 5 * e.standard_error);
    }
    SUBCASE("result does not depend on worker count") {
        const auto one = mc_e(m, 0.3, 1.2, 2.0, 0.1, 300000, 5, 1);
        const auto many = mc_e(m, 0.3, 1.2, 2.0, 0.1, 300000, 5, 7);
        CHECK(one.estimate == many.estimate);
        CHECK(one.standard_error == many.standard_error);
    }
}

TEST_CASE("SE is honest: about 95% of 2SE intervals cover the truth") {
    const HardySingletModel m;
    int covered = 0;
    const int reps = 400;
    const double truth = hardy_closed_form_e(0.3, 1.9, 0.3, 1.9);
    for (int k = 0; k < reps; ++k) {
        const auto e = mc_e(m, 0.3, 1.9, 0.3, 1.9, 2000, 1000 + k, 1);
        covered += std::abs(e.estimate - truth) <= 2 * e.standard_error;
    }
    CHECK(covered >= 0.9 * reps);
    CHECK(covered <= 0.99 * reps);
}

TEST_CASE("build_table") {
    SUBCASE("empty log") { CHECK(build_table(TrialLog{}).cells.empty()); }
    SUBCASE("one small cell") {
        const auto t = build_table(tiny_log({{1, 1}, {1, -1}, {1, 1}, {-1, -1}}));
        REQUIRE(t.cells.size() == 1);
        const auto& c = t.cells.begin()->second;
        CHECK(c.estimate == 0.5);
        CHECK(c.count == 4);
        CHECK_FALSE(c.sufficient);
        CHECK(c.standard_error == doctest::Approx(std::sqrt(0.75 / 4)));
        CHECK_THROWS_AS(t.correlations().at(t.cells.begin()->first), InsufficientDataError);
    }
    SUBCASE("two cells keep their counts") {
        auto log = tiny_log({{1, 1}, {1, 1}, {-1, 1}});
        log.station2.intern(SettingLabel("b'", 2.0));
        log.records[2].b = 1;
        const auto t = build_table(log, 1);
        REQUIRE(t.cells.size() == 2);
        CHECK(t.cells.at(CellKey("a", "b", "a", "b")).count == 2);
        CHECK(t.cells.at(CellKey("a", "b'", "a", "b")).count == 1);
        CHECK(t.cells.at(CellKey("a", "b'", "a", "b")).sufficient);
    }
}

TEST_CASE("table CSV round trip is exact") {
    TrialLog log;
    log.station1.intern(SettingLabel("a", 0.0));
    log.station2.intern(SettingLabel("b", 0.0));
    Rng rng(4);
    for (int i = 0; i < 777; ++i) {
        TrialRecord r;
        r.outcome_a = rng.uniform() < 0.3 ? 1 : -1;
        r.outcome_b = rng.uniform() < 0.6 ? 1 : -1;
        log.records.push_back(r);
    }
    const auto t = build_table(log);
    std::stringstream ss;
    write_table_csv(ss, t);
    const auto back = read_table_csv(ss);
    REQUIRE(back.cells.size() == 1);
    const auto& x = t.cells.begin()->second;
    const auto& y = back.cells.begin()->second;
    CHECK(x.estimate == y.estimate);
    CHECK(x.standard_error == y.standard_error);
    CHECK(x.count == y.count);

    std::stringstream again;
    write_table_csv(again, t);
    CHECK(read_table_csv(again, 1000).cells.begin()->second.sufficient == false);
}

TEST_CASE("trial log CSV round trip") {
    TrialLog log = tiny_log({{1, -1}, {-1, -1}});
    log.records[0].lambda = 0.125;
    log.records[1].t1 = 3.5;
    std::stringstream ss;
    write_trial_log_csv(ss, log);
    const auto back = read_trial_log_csv(ss);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].lambda == 0.125);
    CHECK_FALSE(back.records[1].has_lambda());
    CHECK(back.records[1].t1 == 3.5);
    CHECK(back.a(back.records[0]).id == "a");
    CHECK(back.records[1].outcome_a == -1);
}

TEST_CASE("CH probability estimates") {
    SUBCASE("all (+1, +1)") {
        const auto log = tiny_log(std::vector<std::pair<int, int>>(200, {1, 1}));
        const auto est = estimate_ch_probs(log, log.station1[0], log.station2[0],
                                           log.station1[0], log.station2[0]);
        CHECK(est.joint.value == 1.0);
        CHECK(est.p1.value == 1.0);
        CHECK(est.p2.value == 1.0);
    }
    SUBCASE("quantum at a = b has no (+, +)") {
        Rng rng(6);
        std::vector<std::pair<int, int>> o;
        for (int i = 0; i < 100000; ++i) o.push_back(quantum_sample_pair(0.5, 0.5, rng));
        const auto log = tiny_log(o);
        const auto est = estimate_ch_probs(log, log.station1[0], log.station2[0],
                                           log.station1[0], log.station2[0]);
        CHECK(est.joint.value <= 5 * std::max(est.joint.standard_error, 1e-6));
    }
    SUBCASE("hardy lifted matches quadrature") {
        const HardySingletModel m;
        Rng rng(8);
        std::vector<std::pair<int, int>> o;
        for (int i = 0; i < 1000000; ++i) {
            const auto d = m.draw(0.7, 2.9, 1.3, 4.4, rng);
            o.emplace_back(d.a, d.b);
        }
        const auto log = tiny_log(o);
        const auto est = estimate_ch_probs(log, log.station1[0], log.station2[0],
                                           log.station1[0], log.station2[0]);
        const auto q = quadrature_ch(LiftedLhv(m), 0.7, 2.9, 1.3, 4.4);
        CHECK(std::abs(est.joint.value - q.joint_plus) < 5 * est.joint.standard_error);
    }
}

TEST_CASE("worker default honours RBL_WORKERS") {
    setenv("RBL_WORKERS", "0", 1);
    CHECK(default_workers() == 1);
    setenv("RBL_WORKERS", "3", 1);
    CHECK(default_workers() == 3);
    unsetenv("RBL_WORKERS");
    CHECK(default_workers() >= 1);
}
