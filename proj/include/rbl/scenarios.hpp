#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rbl/estimation.hpp"
#include "rbl/inequalities.hpp"
#include "rbl/models.hpp"
#include "rbl/spacetime.hpp"

namespace rbl {

enum class ScheduleKind { Periodic, RandomSwitch, Stream };
enum class RetardedDefinition { Simple, Predictive };

std::string_view to_string(ScheduleKind k) noexcept;
std::string_view to_string(RetardedDefinition d) noexcept;

struct StationSpec {
    std::vector<SettingLabel> labels;  // palette, in declaration order
    ScheduleKind kind = ScheduleKind::Periodic;
    // Periodic: `period` is one full pass through `cycle`; each label holds for
    // period / cycle.size(), the first starting at `phase`.
    double period = 1.0;
    double phase = 0.0;
    std::vector<std::string> cycle;  // label ids; empty = all labels in order
    // Random switching: exponential decision times at `rate`, labels drawn
    // uniformly from `cycle` (or the palette), over a constant `initial` base.
    double rate = 1.0;
    std::string initial;  // empty = first label
    // Stream: interventions read from this CSV over a constant `initial` base.
    std::filesystem::path file;
    std::vector<std::string> quartet;  // (x, x') for the inequalities; empty = first two labels
};

struct ScenarioConfig {
    Geometry geometry;
    std::string model = std::string(HardySingletModel::kName);
    StationSpec station1;
    StationSpec station2;
    RetardedDefinition definition = RetardedDefinition::Simple;
    double delay = 0.0;  // decision-to-effect delay of random-switch interventions
    std::uint64_t n_trials = 1000;
    double spacing = 1.0;
    std::optional<double> start;  // first trial time; default t0 + L/c + spacing
    std::uint64_t seed = 1;
    std::uint64_t min_count = kDefaultMinCount;

    double first_trial_time() const;
    double last_trial_time() const;
    // Throws ConfigError on any inconsistency.
    void validate() const;
};

// Flat "key = value" text with [geometry], [model], [station1], [station2] and
// [run] sections; '#' starts a comment. Unknown sections or keys are errors.
// Stream paths are resolved relative to `base_dir`.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

// Builds one station's timeline on [start, horizon]. `stream` supplies the
// interventions of a Stream station (already filtered to this station).
SettingSchedule make_schedule(const StationSpec& spec, int station, double start, double horizon,
                              double delay, std::uint64_t seed,
                              const std::vector<Intervention>& stream = {});

// Pearson chi-squared test of independence between the actual pair (a, b) and
// the retarded pair (a_r, b_r), at the 99.9% level.
struct IndependenceTest {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double critical_value = 0.0;
    bool independent = true;
};

struct SkippedReport {
    std::string name;
    Octuple inputs;
    std::string reason;
};

struct ScenarioResult {
    TrialLog log;
    CorrelationTable table;
    std::vector<InequalityReport> reports;
    std::vector<SkippedReport> skipped;
    std::map<EqualityClass, double> classification;  // fractions, sum to 1
    RetardedWeights retarded_weights;                // empirical p̂(a_r, b_r)
    IndependenceTest independence;
    std::shared_ptr<const SettingSchedule> schedule1;
    std::shared_ptr<const SettingSchedule> schedule2;

    bool any_violated() const;
};

ScenarioResult run_scenario(const ScenarioConfig& config, unsigned workers = default_workers());

IndependenceTest independence_test(const TrialLog& log);

// Recomputes every record's retarded labels from the schedules through the
// label-level retarded-setting functions; returns the number of mismatches.
std::size_t audit_retarded(const ScenarioResult& result, const ScenarioConfig& config);

// The inequality reports for a quartet over a correlation table (and, when
// given, CH probabilities). Cells that never occurred are reported as skipped.
void evaluate_reports(const CorrelationInput& correlations, const ProbabilityInput* probabilities,
                      const RetardedWeights& weights, bool weights_independent,
                      const Palette& station1, const Palette& station2,
                      const std::vector<std::string>& quartet1,
                      const std::vector<std::string>& quartet2,
                      std::vector<InequalityReport>& reports,
                      std::vector<SkippedReport>& skipped);

// Writes trials.csv, table.csv, reports.json and summary.json into `dir`.
void write_outputs(const ScenarioResult& result, const ScenarioConfig& config,
                   const std::filesystem::path& dir);

}  // namespace rbl
