#include "rbl/verify.hpp"

#include <cmath>

#include "rbl/angles.hpp"
#include "rbl/estimation.hpp"
#include "rbl/inequalities.hpp"
#include "rbl/models.hpp"
#include "rbl/rng.hpp"
#include "text.hpp"

namespace rbl {

namespace {

SettingLabel label(const char* id, double angle) { return SettingLabel(id, angle); }

Octuple random_octuple(Rng& rng) {
    auto u = [&rng] { return rng.uniform(0.0, kTwoPi); };
    return Octuple{label("a", u()),   label("a'", u()),   label("b", u()),   label("b'", u()),
                   label("a_r", u()), label("a'_r", u()), label("b_r", u()), label("b'_r", u())};
}

}  // namespace

std::vector<VerifyItem> run_verification(std::uint64_t seed) {
    std::vector<VerifyItem> items;
    Rng rng(derive_seed(seed, 0x7e));
    const HardySingletModel hardy;

    {
        const auto r = chsh_identity_check();
        items.push_back({"chsh identity (16 sign assignments)", r.pass, r.counterexample});
    }
    {
        const auto r = ch_identity_check(1'000'000, seed);
        items.push_back({"ch identity (1e6 points of [0,1]^4)", r.pass, r.counterexample});
    }
    {
        const double mass = quadrature_mass(hardy.hidden());
        items.push_back({"hidden density integrates to 1", std::abs(mass - 1.0) <= 1e-9,
                         "mass " + text::exact(mass)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double x = rng.uniform(0.0, kTwoPi), y = rng.uniform(0.0, kTwoPi);
            const auto p = quadrature_ch(LiftedLhv(hardy), x, y, y, x);
            worst = std::max({worst, std::abs(2.0 * p.p1 - 1.0), std::abs(2.0 * p.p2 - 1.0)});
        }
        items.push_back({"hardy outcomes have zero mean", worst <= 1e-9,
                         "max |<A>|, |<B>| " + text::exact(worst)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto s = random_octuple(rng);
            const double q = quadrature_e(hardy, s.a.angle, s.b.angle, s.a_r.angle, s.b_r.angle);
            const double c = hardy_closed_form_e(s.a.angle, s.b.angle, s.a_r.angle, s.b_r.angle);
            worst = std::max(worst, std::abs(q - c));
        }
        items.push_back({"quadrature matches closed form (1e5 nodes, 1e-4)", worst <= 1e-4,
                         "max error " + text::exact(worst)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto s = random_octuple(rng);
            const double shift = rng.uniform(-10.0, 10.0);
            const double a = s.a.angle, b = s.b.angle, ar = s.a_r.angle, br = s.b_r.angle;
            worst = std::max({worst,
                              std::abs(hardy_closed_form_e(a, b, ar, br) -
                                       hardy_closed_form_e(a + shift, b + shift, ar + shift,
                                                           br + shift)),
                              std::abs(quantum_e(a, b) - quantum_e(a + shift, b + shift))});
        }
        items.push_back({"rotation invariance (1e-12)", worst <= 1e-12,
                         "max change " + text::exact(worst)});
    }
    {
        bool exact = true;
        for (int i = 0; i < 64; ++i) {
            for (int j = 0; j < 64; ++j) {
                const double a = i * kTwoPi / 64, b = j * kTwoPi / 64;
                exact = exact && hardy_closed_form_e(a, b, a, b) == quantum_e(a, b);
            }
        }
        items.push_back({"hardy reproduces -cos(a-b) when retarded = actual", exact, ""});
    }
    {
        std::size_t bad = 0;
        for (int i = 0; i < 10'000; ++i) {
            const auto s = random_octuple(rng);
            const double v = retarded_chsh(analytic_chsh_input(hardy, s), s).value;
            bad += v < -2.0 - 1e-9 || v > 2.0 + 1e-9;
        }
        items.push_back({"hardy retarded CHSH within [-2,2] (1e4 octuples)", bad == 0,
                         std::to_string(bad) + " exceptions"});
    }
    {
        std::size_t bad = 0;
        for (int i = 0; i < 2'000; ++i) {
            const auto s = random_octuple(rng);
            // Lifted λ-quadrature, not the closed form.
            ProbabilityInput q;
            const LiftedLhv lifted(hardy);
            auto cell = [&](const SettingLabel& x, const SettingLabel& y, const SettingLabel& xr,
                            const SettingLabel& yr) {
                const auto p = quadrature_ch(lifted, x.angle, y.angle, xr.angle, yr.angle, 2048);
                q.joint[CellKey(x, y, xr, yr)] = Estimate{p.joint_plus, 0.0, 0, true};
                return p;
            };
            const auto first = cell(s.a2, s.b2, s.a2_r, s.b2_r);
            cell(s.a2, s.b, s.a_r, s.b2_r);
            cell(s.a, s.b2, s.a2_r, s.b_r);
            cell(s.a, s.b, s.a_r, s.b_r);
            q.p1[s.a2.id] = Estimate{first.p1, 0.0, 0, true};
            q.p2[s.b2.id] = Estimate{first.p2, 0.0, 0, true};
            const double v = retarded_ch(q, s).value;
            bad += v < -1.0 - 1e-9 || v > 1e-9;
        }
        items.push_back({"hardy-lifted retarded CH within [-1,0] (2e3 octuples)", bad == 0,
                         std::to_string(bad) + " exceptions"});
    }
    return items;
}

}  // namespace rbl
