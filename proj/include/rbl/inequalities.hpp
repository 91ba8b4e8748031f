#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbl/spacetime.hpp"

namespace rbl {

// Cell of E(a, b | a_r, b_r) or p12(a, b | a_r, b_r), keyed by label ids.
struct CellKey {
    std::string a;
    std::string b;
    std::string a_r;
    std::string b_r;

    CellKey() = default;
    CellKey(std::string a_id, std::string b_id, std::string a_r_id, std::string b_r_id)
        : a(std::move(a_id)), b(std::move(b_id)), a_r(std::move(a_r_id)), b_r(std::move(b_r_id)) {}
    CellKey(const SettingLabel& a_l, const SettingLabel& b_l, const SettingLabel& a_r_l,
            const SettingLabel& b_r_l)
        : a(a_l.id), b(b_l.id), a_r(a_r_l.id), b_r(b_r_l.id) {}

    std::string to_string() const;  // "(a,b|a_r,b_r)"
    auto operator<=>(const CellKey&) const = default;
};

struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::uint64_t count = 0;
    bool sufficient = true;
};

enum class Source { Analytic, MonteCarlo };
std::string_view to_string(Source s) noexcept;

struct CorrelationInput {
    std::map<CellKey, Estimate> cells;
    Source source = Source::Analytic;

    // Throws MissingCellError or InsufficientDataError.
    const Estimate& at(const CellKey& key) const;
    bool has(const CellKey& key) const { return cells.contains(key); }
};

struct ProbabilityInput {
    std::map<CellKey, Estimate> joint;       // p12(a, b | a_r, b_r)
    std::map<std::string, Estimate> p1;      // p1(a) by station-1 label id
    std::map<std::string, Estimate> p2;      // p2(b) by station-2 label id
    Source source = Source::Analytic;
};

// Actual settings a, a', b, b' and the retarded values a_r, a'_r, b_r, b'_r.
struct Octuple {
    SettingLabel a, a2, b, b2;
    SettingLabel a_r, a2_r, b_r, b2_r;

    // Retarded settings equal to the actual ones, term by term.
    static Octuple tied(const SettingLabel& a, const SettingLabel& a2, const SettingLabel& b,
                        const SettingLabel& b2);
    // Every term carries the retarded pair (a, b).
    static Octuple same_retarded(const SettingLabel& a, const SettingLabel& a2,
                                 const SettingLabel& b, const SettingLabel& b2);
};

enum class Verdict { Satisfied, Violated, Inconclusive };
enum class BoundSide { None, Lower, Upper };
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(BoundSide s) noexcept;

struct InequalityReport {
    std::string name;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Verdict verdict = Verdict::Satisfied;
    BoundSide side = BoundSide::None;  // the bound that was crossed, if any
    double margin_sigma = 0.0;         // signed distance past the nearer bound in SE units
    double combined_se = 0.0;
    Source source = Source::Analytic;
    Octuple inputs;
    std::optional<bool> settings_independent;  // averaged CHSH only
};

// Verdict band: 3 combined SE for sampled inputs; analytic inputs get a 1e-12
// floating-point allowance instead of a zero band.
inline constexpr double kSigmaBand = 3.0;
inline constexpr double kAnalyticSlack = 1e-12;

InequalityReport retarded_chsh(const CorrelationInput& e, const Octuple& s);

InequalityReport same_retarded_chsh(const CorrelationInput& e, const SettingLabel& a,
                                    const SettingLabel& a2, const SettingLabel& b,
                                    const SettingLabel& b2);

// 2 E(a, b | a, b); cannot be violated while |E| <= 1.
InequalityReport both_equal_reduction(const CorrelationInput& e, const SettingLabel& a,
                                      const SettingLabel& b);

// Retarded CHSH with a' = a and station 1's retarded settings equal to a.
InequalityReport one_end_equal_chsh(const CorrelationInput& e, const SettingLabel& a,
                                    const SettingLabel& b, const SettingLabel& b2,
                                    const SettingLabel& b_r, const SettingLabel& b2_r);

// Weights p(a_r, b_r) keyed by (station-1 id, station-2 id).
using RetardedWeights = std::map<std::pair<std::string, std::string>, double>;

// CHSH on E_av(x, y) = Σ p(a_r, b_r) E(x, y | a_r, b_r). Only a valid bound when
// the weights do not depend on the actual settings; the caller's claim is kept
// in the report. Zero-weight cells are not required.
InequalityReport averaged_chsh(const CorrelationInput& e, const RetardedWeights& weights,
                               const SettingLabel& a, const SettingLabel& a2,
                               const SettingLabel& b, const SettingLabel& b2,
                               bool settings_independent);

// p12(a',b'|a'_r,b'_r) + p12(a',b|a_r,b'_r) + p12(a,b'|a'_r,b_r) - p12(a,b|a_r,b_r)
// - p1(a') - p2(b'), bounded by [-1, 0]. The subtracted marginals belong to the
// settings that do not appear in the negated term; with them the per-λ
// expression is the [-1, 0] identity below. p1, p2 come from the input's
// marginal maps; pass conditional marginals there to use p1(a'|b'_r), p2(b'|a'_r).
InequalityReport retarded_ch(const ProbabilityInput& p, const Octuple& s);

struct IdentityCheck {
    bool pass = true;
    std::string counterexample;
    std::uint64_t cases = 0;
};

// X'Y' + X'Y + XY' - XY ∈ {-2, +2} over all 16 sign assignments.
IdentityCheck chsh_identity_check();
// -1 <= x'y' + x'y + xy' - xy - x' - y' <= 0 on `samples` uniform points of [0,1]^4.
IdentityCheck ch_identity_check(std::uint64_t samples, std::uint64_t seed = 1);

double chsh_expression(int x, int x2, int y, int y2) noexcept;
double ch_expression(double x, double x2, double y, double y2) noexcept;

}  // namespace rbl
