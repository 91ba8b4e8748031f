#include "rbl/inequalities.hpp"

#include <cmath>
#include <limits>

#include "rbl/errors.hpp"
#include "rbl/rng.hpp"

namespace rbl {

std::string CellKey::to_string() const { return "(" + a + "," + b + "|" + a_r + "," + b_r + ")"; }

std::string_view to_string(Source s) noexcept {
    return s == Source::Analytic ? "analytic" : "monte-carlo";
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Satisfied: return "satisfied";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string_view to_string(BoundSide s) noexcept {
    switch (s) {
        case BoundSide::None: return "none";
        case BoundSide::Lower: return "lower";
        case BoundSide::Upper: return "upper";
    }
    return "unknown";
}

namespace {

const Estimate& lookup(const std::map<CellKey, Estimate>& cells, const CellKey& key) {
    const auto it = cells.find(key);
    if (it == cells.end()) throw MissingCellError(key.to_string());
    if (!it->second.sufficient) {
        throw InsufficientDataError("cell " + key.to_string() + " has only " +
                                    std::to_string(it->second.count) + " trials");
    }
    return it->second;
}

const Estimate& lookup(const std::map<std::string, Estimate>& marginals, const std::string& id,
                       std::string_view which) {
    const auto it = marginals.find(id);
    if (it == marginals.end()) throw MissingCellError(std::string(which) + "(" + id + ")");
    if (!it->second.sufficient) {
        throw InsufficientDataError(std::string(which) + "(" + id + ") is under-counted");
    }
    return it->second;
}

// Linear combination Σ coef·x over estimates. Repeated cells are merged so that
// their standard errors add coherently.
class LinearForm {
public:
    void add(double coef, const Estimate* est) {
        for (auto& [c, e] : terms_) {
            if (e == est) {
                c += coef;
                return;
            }
        }
        terms_.emplace_back(coef, est);
    }

    double value() const {
        double v = 0.0;
        for (const auto& [c, e] : terms_) v += c * e->value;
        return v;
    }

    double standard_error() const {
        double var = 0.0;
        for (const auto& [c, e] : terms_) var += c * c * e->standard_error * e->standard_error;
        return std::sqrt(var);
    }

private:
    std::vector<std::pair<double, const Estimate*>> terms_;
};

InequalityReport judge(std::string name, const LinearForm& form, double lower, double upper,
                       Source source, const Octuple& inputs) {
    InequalityReport r;
    r.name = std::move(name);
    r.value = form.value();
    r.lower = lower;
    r.upper = upper;
    r.combined_se = form.standard_error();
    r.source = source;
    r.inputs = inputs;

    const double below = lower - r.value;
    const double above = r.value - upper;
    const double excess = std::max(below, above);
    const double tol =
        source == Source::Analytic ? kAnalyticSlack : kSigmaBand * r.combined_se;

    if (excess > tol) {
        r.verdict = Verdict::Violated;
    } else if (excess > 0.0 && source != Source::Analytic) {
        r.verdict = Verdict::Inconclusive;
    } else {
        r.verdict = Verdict::Satisfied;
    }
    if (r.verdict != Verdict::Satisfied) r.side = below > above ? BoundSide::Lower : BoundSide::Upper;

    if (r.combined_se > 0.0) {
        r.margin_sigma = excess / r.combined_se;
    } else {
        r.margin_sigma = r.verdict == Verdict::Violated ? std::numeric_limits<double>::infinity()
                                                        : -std::numeric_limits<double>::infinity();
    }
    return r;
}

// Shared by the CHSH family; `name` distinguishes the reductions.
InequalityReport chsh_core(std::string name, const CorrelationInput& e, const Octuple& s) {
    LinearForm form;
    form.add(1.0, &e.at(CellKey(s.a2, s.b2, s.a2_r, s.b2_r)));
    form.add(1.0, &e.at(CellKey(s.a2, s.b, s.a_r, s.b2_r)));
    form.add(1.0, &e.at(CellKey(s.a, s.b2, s.a2_r, s.b_r)));
    form.add(-1.0, &e.at(CellKey(s.a, s.b, s.a_r, s.b_r)));
    return judge(std::move(name), form, -2.0, 2.0, e.source, s);
}

}  // namespace

const Estimate& CorrelationInput::at(const CellKey& key) const { return lookup(cells, key); }

Octuple Octuple::tied(const SettingLabel& a, const SettingLabel& a2, const SettingLabel& b,
                      const SettingLabel& b2) {
    return Octuple{a, a2, b, b2, a, a2, b, b2};
}

Octuple Octuple::same_retarded(const SettingLabel& a, const SettingLabel& a2,
                               const SettingLabel& b, const SettingLabel& b2) {
    return Octuple{a, a2, b, b2, a, a, b, b};
}

InequalityReport retarded_chsh(const CorrelationInput& e, const Octuple& s) {
    return chsh_core("retarded_chsh", e, s);
}

InequalityReport same_retarded_chsh(const CorrelationInput& e, const SettingLabel& a,
                                    const SettingLabel& a2, const SettingLabel& b,
                                    const SettingLabel& b2) {
    return chsh_core("same_retarded_chsh", e, Octuple::same_retarded(a, a2, b, b2));
}

InequalityReport both_equal_reduction(const CorrelationInput& e, const SettingLabel& a,
                                      const SettingLabel& b) {
    LinearForm form;
    form.add(2.0, &e.at(CellKey(a, b, a, b)));
    return judge("both_equal_reduction", form, -2.0, 2.0, e.source, Octuple{a, a, b, b, a, a, b, b});
}

InequalityReport one_end_equal_chsh(const CorrelationInput& e, const SettingLabel& a,
                                    const SettingLabel& b, const SettingLabel& b2,
                                    const SettingLabel& b_r, const SettingLabel& b2_r) {
    return chsh_core("one_end_equal_chsh", e, Octuple{a, a, b, b2, a, a, b_r, b2_r});
}

InequalityReport averaged_chsh(const CorrelationInput& e, const RetardedWeights& weights,
                               const SettingLabel& a, const SettingLabel& a2,
                               const SettingLabel& b, const SettingLabel& b2,
                               bool settings_independent) {
    double total = 0.0;
    for (const auto& [key, w] : weights) {
        if (!(w >= 0.0)) {
            throw InvalidArgumentError("negative weight for retarded pair (" + key.first + "," +
                                       key.second + ")");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgumentError("retarded-setting weights sum to " + std::to_string(total));
    }

    LinearForm form;
    const std::pair<const SettingLabel*, const SettingLabel*> pairs[] = {
        {&a2, &b2}, {&a2, &b}, {&a, &b2}, {&a, &b}};
    const double signs[] = {1.0, 1.0, 1.0, -1.0};
    for (int i = 0; i < 4; ++i) {
        for (const auto& [key, w] : weights) {
            if (w == 0.0) continue;
            const CellKey cell(pairs[i].first->id, pairs[i].second->id, key.first, key.second);
            form.add(signs[i] * w, &e.at(cell));
        }
    }
    auto report = judge("averaged_chsh", form, -2.0, 2.0, e.source, Octuple::tied(a, a2, b, b2));
    report.settings_independent = settings_independent;
    return report;
}

InequalityReport retarded_ch(const ProbabilityInput& p, const Octuple& s) {
    for (const auto* m : {&p.p1, &p.p2}) {
        for (const auto& [id, est] : *m) {
            if (est.value < 0.0 || est.value > 1.0) {
                throw InvalidArgumentError("marginal probability out of [0,1] for " + id);
            }
        }
    }
    auto checked = [&](const CellKey& key) -> const Estimate& {
        const auto& est = lookup(p.joint, key);
        if (est.value < 0.0 || est.value > 1.0) {
            throw InvalidArgumentError("probability out of [0,1] in cell " + key.to_string());
        }
        return est;
    };
    LinearForm form;
    form.add(1.0, &checked(CellKey(s.a2, s.b2, s.a2_r, s.b2_r)));
    form.add(1.0, &checked(CellKey(s.a2, s.b, s.a_r, s.b2_r)));
    form.add(1.0, &checked(CellKey(s.a, s.b2, s.a2_r, s.b_r)));
    form.add(-1.0, &checked(CellKey(s.a, s.b, s.a_r, s.b_r)));
    form.add(-1.0, &lookup(p.p1, s.a2.id, "p1"));
    form.add(-1.0, &lookup(p.p2, s.b2.id, "p2"));
    return judge("retarded_ch", form, -1.0, 0.0, p.source, s);
}

double chsh_expression(int x, int x2, int y, int y2) noexcept {
    return x2 * y2 + x2 * y + x * y2 - x * y;
}

double ch_expression(double x, double x2, double y, double y2) noexcept {
    return x2 * y2 + x2 * y + x * y2 - x * y - x2 - y2;
}

IdentityCheck chsh_identity_check() {
    IdentityCheck result;
    for (int bits = 0; bits < 16; ++bits) {
        const int x = bits & 1 ? 1 : -1;
        const int x2 = bits & 2 ? 1 : -1;
        const int y = bits & 4 ? 1 : -1;
        const int y2 = bits & 8 ? 1 : -1;
        const double v = chsh_expression(x, x2, y, y2);
        ++result.cases;
        if (v != 2.0 && v != -2.0 && result.pass) {
            result.pass = false;
            result.counterexample = "X=" + std::to_string(x) + " X'=" + std::to_string(x2) +
                                    " Y=" + std::to_string(y) + " Y'=" + std::to_string(y2) +
                                    " gives " + std::to_string(v);
        }
    }
    return result;
}

IdentityCheck ch_identity_check(std::uint64_t samples, std::uint64_t seed) {
    IdentityCheck result;
    Rng rng(derive_seed(seed, 0xc4));
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double x = rng.uniform(), x2 = rng.uniform(), y = rng.uniform(), y2 = rng.uniform();
        const double v = ch_expression(x, x2, y, y2);
        ++result.cases;
        if ((v < -1.0 || v > 0.0) && result.pass) {
            result.pass = false;
            result.counterexample = "x=" + std::to_string(x) + " x'=" + std::to_string(x2) +
                                    " y=" + std::to_string(y) + " y'=" + std::to_string(y2) +
                                    " gives " + std::to_string(v);
        }
    }
    return result;
}

}  // namespace rbl
