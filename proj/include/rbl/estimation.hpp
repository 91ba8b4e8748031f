#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbl/inequalities.hpp"
#include "rbl/models.hpp"
#include "rbl/spacetime.hpp"

namespace rbl {

inline constexpr std::size_t kDefaultQuadratureNodes = 100'000;
inline constexpr std::size_t kMinQuadratureNodes = 1'000;
inline constexpr std::uint64_t kDefaultMinCount = 100;
// Monte Carlo trials per independently seeded block.
inline constexpr std::uint64_t kTrialBlock = 1u << 16;

// RBL_WORKERS caps worker threads (0 or 1 = serial). Unset: hardware concurrency.
unsigned default_workers();

// --- λ-quadrature ----------------------------------------------------------

// Midpoint rule over Γ of A·B·ρ. Throws UnsupportedModelError for nonlocal models.
double quadrature_e(const Model& model, double a, double b, double a_r, double b_r,
                    std::size_t nodes = kDefaultQuadratureNodes);

// Midpoint rule for p12 = ∫ p1 p2 ρ and the marginals ∫ p1 ρ, ∫ p2 ρ.
ChProbabilities quadrature_ch(const StochasticLhv& model, double a, double b, double a_r,
                              double b_r, std::size_t nodes = kDefaultQuadratureNodes);

// ∫ ρ over Γ by the same rule.
double quadrature_mass(const HiddenSpace& hidden, std::size_t nodes = kDefaultQuadratureNodes);

// Closed form when the model has one, otherwise λ-quadrature.
double model_e(const Model& model, double a, double b, double a_r, double b_r,
               std::size_t nodes = kDefaultQuadratureNodes);
ChProbabilities model_ch(const Model& model, double a, double b, double a_r, double b_r,
                         std::size_t nodes = kDefaultQuadratureNodes);

// --- Monte Carlo -----------------------------------------------------------

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t count = 0;
};

// Mean of A·B over n draws. Block k of kTrialBlock trials uses the stream
// derive_seed(seed, k), so the result does not depend on `workers`.
McEstimate mc_e(const Model& model, double a, double b, double a_r, double b_r,
                std::uint64_t n, std::uint64_t seed, unsigned workers = default_workers());

// --- analytic / sampled inequality inputs ----------------------------------

CorrelationInput analytic_chsh_input(const Model& model, const Octuple& s,
                                     std::size_t nodes = kDefaultQuadratureNodes);
// Joint cells plus p1(a'|b'_r), p2(b'|a'_r) and p1(a|b_r), p2(b|a_r).
ProbabilityInput analytic_ch_input(const Model& model, const Octuple& s,
                                   std::size_t nodes = kDefaultQuadratureNodes);
// Every quadruple over the two palettes.
CorrelationInput analytic_input(const Model& model, const std::vector<SettingLabel>& station1,
                                const std::vector<SettingLabel>& station2,
                                std::size_t nodes = kDefaultQuadratureNodes);
// The four CHSH cells, each from n Monte Carlo draws on its own stream.
CorrelationInput mc_chsh_input(const Model& model, const Octuple& s, std::uint64_t n,
                               std::uint64_t seed, unsigned workers = default_workers());

// --- trial logs ------------------------------------------------------------

// Labels are indices into the log's palettes (a, a_r into station 1; b, b_r into station 2).
struct TrialRecord {
    std::uint64_t trial_id = 0;
    double t1 = 0.0;
    double t2 = 0.0;
    std::uint16_t a = 0, b = 0, a_r = 0, b_r = 0;
    std::int8_t outcome_a = 1;
    std::int8_t outcome_b = 1;
    double lambda = std::numeric_limits<double>::quiet_NaN();  // NaN for nonlocal models

    bool has_lambda() const noexcept { return lambda == lambda; }
};

struct TrialLog {
    Palette station1;
    Palette station2;
    std::vector<TrialRecord> records;

    const SettingLabel& a(const TrialRecord& r) const { return station1[r.a]; }
    const SettingLabel& b(const TrialRecord& r) const { return station2[r.b]; }
    const SettingLabel& a_r(const TrialRecord& r) const { return station1[r.a_r]; }
    const SettingLabel& b_r(const TrialRecord& r) const { return station2[r.b_r]; }
};

// CSV: trial_id,t1,t2,a,b,a_r,b_r,A,B,lambda (lambda blank for nonlocal models).
void write_trial_log_csv(std::ostream& out, const TrialLog& log);
// Labels not found in the given palettes are added with angle 0.
TrialLog read_trial_log_csv(std::istream& in, const Palette& station1 = {},
                            const Palette& station2 = {});

// --- correlation tables ----------------------------------------------------

struct TableCell {
    std::int64_t sum_of_products = 0;
    std::uint64_t count = 0;
    std::uint64_t both_plus = 0;
    double estimate = 0.0;
    double standard_error = 0.0;
    bool sufficient = false;
};

struct CorrelationTable {
    std::map<CellKey, TableCell> cells;
    std::uint64_t min_count = kDefaultMinCount;

    CorrelationInput correlations() const;
};

// Ê = Σ AB / n and SE = sqrt((1 - Ê²)/n) per (a, b, a_r, b_r) cell.
CorrelationTable build_table(const TrialLog& log, std::uint64_t min_count = kDefaultMinCount);

// CSV: a,b,a_r,b_r,E,SE,count,sufficient with E and SE written to round-trip exactly.
void write_table_csv(std::ostream& out, const CorrelationTable& table);
// With `min_count`, sufficiency is recomputed from the counts; otherwise the
// stored column is used.
CorrelationTable read_table_csv(std::istream& in,
                                std::optional<std::uint64_t> min_count = std::nullopt);

// --- Clauser-Horne estimates -----------------------------------------------

struct ChEstimate {
    Estimate joint;  // p̂12 in the cell
    Estimate p1;     // p̂1(a) over all trials with station-1 setting a
    Estimate p2;     // p̂2(b) over all trials with station-2 setting b
};

ChEstimate estimate_ch_probs(const TrialLog& log, const SettingLabel& a, const SettingLabel& b,
                             const SettingLabel& a_r, const SettingLabel& b_r,
                             std::uint64_t min_count = kDefaultMinCount);

// All joint cells and marginals from a log.
ProbabilityInput ch_probabilities(const TrialLog& log, std::uint64_t min_count = kDefaultMinCount);

}  // namespace rbl
