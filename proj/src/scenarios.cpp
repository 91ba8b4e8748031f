#include "rbl/scenarios.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "parallel.hpp"
#include "rbl/errors.hpp"
#include "rbl/rng.hpp"
#include "rbl/serialize.hpp"

namespace rbl {

std::string_view to_string(ScheduleKind k) noexcept {
    switch (k) {
        case ScheduleKind::Periodic: return "periodic";
        case ScheduleKind::RandomSwitch: return "random_switch";
        case ScheduleKind::Stream: return "stream";
    }
    return "unknown";
}

std::string_view to_string(RetardedDefinition d) noexcept {
    return d == RetardedDefinition::Simple ? "simple" : "predictive";
}

namespace {

std::vector<SettingLabel> cycle_labels(const StationSpec& spec) {
    if (spec.cycle.empty()) return spec.labels;
    const Palette palette(spec.labels);
    std::vector<SettingLabel> out;
    for (const auto& id : spec.cycle) out.push_back(palette.at(id));
    return out;
}

const SettingLabel& initial_label(const StationSpec& spec) {
    if (spec.initial.empty()) return spec.labels.front();
    for (const auto& l : spec.labels) {
        if (l.id == spec.initial) return l;
    }
    throw ConfigError("unknown initial label " + spec.initial);
}

}  // namespace

SettingSchedule make_schedule(const StationSpec& spec, int station, double start, double horizon,
                              double delay, std::uint64_t seed,
                              const std::vector<Intervention>& stream) {
    if (spec.labels.empty()) throw ConfigError("station has no labels");
    switch (spec.kind) {
        case ScheduleKind::Periodic: {
            if (!(spec.period > 0.0)) throw ConfigError("period must be positive");
            const auto cycle = cycle_labels(spec);
            const auto n = static_cast<long long>(cycle.size());
            const double dwell = spec.period / static_cast<double>(n);
            auto label_of = [&](long long m) -> const SettingLabel& {
                return cycle[static_cast<std::size_t>(((m % n) + n) % n)];
            };
            long long m = static_cast<long long>(std::floor((start - spec.phase) / dwell));
            ScheduleBuilder builder(station, start, label_of(m));
            if (n > 1) {
                builder.reserve(static_cast<std::size_t>((horizon - start) / dwell) + 2);
                for (++m;; ++m) {
                    const double t = spec.phase + static_cast<double>(m) * dwell;
                    if (t > horizon) break;
                    if (t <= start) continue;
                    if (label_of(m) == label_of(m - 1)) continue;
                    builder.switch_to(t, label_of(m));
                }
            }
            return builder.build();
        }
        case ScheduleKind::RandomSwitch: {
            if (!(spec.rate > 0.0)) throw ConfigError("random switching needs a positive rate");
            const auto choices = cycle_labels(spec);
            ScheduleBuilder builder(station, start, initial_label(spec));
            builder.reserve(static_cast<std::size_t>(1.05 * spec.rate * (horizon - start)) + 16);
            Rng rng(seed);
            double t = start;
            while (true) {
                t += -std::log1p(-rng.uniform()) / spec.rate;
                if (t > horizon) break;
                builder.intervene(t, delay, choices[rng.below(choices.size())], "random");
            }
            return builder.build();
        }
        case ScheduleKind::Stream: {
            ScheduleBuilder builder(station, start, initial_label(spec));
            for (const auto& iv : stream) {
                if (iv.station == station) builder.intervene(iv);
            }
            return builder.build();
        }
    }
    throw ConfigError("unknown schedule kind");
}

IndependenceTest independence_test(const TrialLog& log) {
    const std::size_t n1 = log.station1.size(), n2 = log.station2.size();
    const std::size_t pairs = n1 * n2;
    std::vector<double> counts(pairs * pairs, 0.0);
    for (const auto& r : log.records) {
        counts[(r.a * n2 + r.b) * pairs + (r.a_r * n2 + r.b_r)] += 1.0;
    }
    std::vector<double> rows(pairs, 0.0), cols(pairs, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        for (std::size_t j = 0; j < pairs; ++j) {
            rows[i] += counts[i * pairs + j];
            cols[j] += counts[i * pairs + j];
        }
        total += rows[i];
    }
    IndependenceTest test;
    int nonzero_rows = 0, nonzero_cols = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        nonzero_rows += rows[i] > 0.0;
        nonzero_cols += cols[i] > 0.0;
    }
    test.degrees_of_freedom = (nonzero_rows - 1) * (nonzero_cols - 1);
    if (test.degrees_of_freedom <= 0) return test;
    for (std::size_t i = 0; i < pairs; ++i) {
        for (std::size_t j = 0; j < pairs; ++j) {
            if (rows[i] == 0.0 || cols[j] == 0.0) continue;
            const double expected = rows[i] * cols[j] / total;
            const double d = counts[i * pairs + j] - expected;
            test.statistic += d * d / expected;
        }
    }
    const boost::math::chi_squared dist(test.degrees_of_freedom);
    test.critical_value = boost::math::quantile(dist, 0.999);
    test.independent = test.statistic < test.critical_value;
    return test;
}

void evaluate_reports(const CorrelationInput& correlations, const ProbabilityInput* probabilities,
                      const RetardedWeights& weights, bool weights_independent,
                      const Palette& station1, const Palette& station2,
                      const std::vector<std::string>& quartet1,
                      const std::vector<std::string>& quartet2,
                      std::vector<InequalityReport>& reports,
                      std::vector<SkippedReport>& skipped) {
    const auto& a = station1.at(quartet1.at(0));
    const auto& a2 = station1.at(quartet1.at(1));
    const auto& b = station2.at(quartet2.at(0));
    const auto& b2 = station2.at(quartet2.at(1));

    auto attempt = [&](std::string name, const Octuple& s, auto&& evaluate) {
        try {
            reports.push_back(evaluate());
        } catch (const MissingCellError& e) {
            skipped.push_back({std::move(name), s, e.what()});
        } catch (const InsufficientDataError& e) {
            skipped.push_back({std::move(name), s, e.what()});
        }
    };

    for (const auto& a_r : station1.labels()) {
        for (const auto& a2_r : station1.labels()) {
            for (const auto& b_r : station2.labels()) {
                for (const auto& b2_r : station2.labels()) {
                    const Octuple s{a, a2, b, b2, a_r, a2_r, b_r, b2_r};
                    attempt("retarded_chsh", s, [&] { return retarded_chsh(correlations, s); });
                    if (probabilities != nullptr) {
                        attempt("retarded_ch", s, [&] { return retarded_ch(*probabilities, s); });
                    }
                }
            }
        }
    }
    const auto same = Octuple::same_retarded(a, a2, b, b2);
    attempt("same_retarded_chsh", same,
            [&] { return same_retarded_chsh(correlations, a, a2, b, b2); });
    attempt("averaged_chsh", Octuple::tied(a, a2, b, b2), [&] {
        return averaged_chsh(correlations, weights, a, a2, b, b2, weights_independent);
    });
}

bool ScenarioResult::any_violated() const {
    return std::any_of(reports.begin(), reports.end(),
                       [](const auto& r) { return r.verdict == Verdict::Violated; });
}

ScenarioResult run_scenario(const ScenarioConfig& config, unsigned workers) {
    config.validate();
    const auto model = make_model(config.model);
    const Geometry& geom = config.geometry;
    const double light = geom.light_delay();
    const double first = config.first_trial_time();
    const double last = config.last_trial_time();

    std::vector<Intervention> stream;
    const Palette palette1(config.station1.labels), palette2(config.station2.labels);
    for (const auto* spec : {&config.station1, &config.station2}) {
        if (spec->kind != ScheduleKind::Stream) continue;
        auto rows = load_interventions_csv(spec->file.string(), palette1, palette2);
        stream.insert(stream.end(), rows.begin(), rows.end());
    }

    ScenarioResult result;
    result.schedule1 = std::make_shared<const SettingSchedule>(make_schedule(
        config.station1, 1, geom.t0, last, config.delay, derive_seed(config.seed, 1), stream));
    result.schedule2 = std::make_shared<const SettingSchedule>(make_schedule(
        config.station2, 2, geom.t0, last, config.delay, derive_seed(config.seed, 2), stream));
    const auto& s1 = *result.schedule1;
    const auto& s2 = *result.schedule2;

    auto& log = result.log;
    log.station1 = palette1;
    log.station2 = palette2;
    // Schedule palette index -> log palette index.
    auto remap = [](const SettingSchedule& s, const Palette& p) {
        std::vector<std::uint16_t> map;
        for (const auto& l : s.palette().labels()) {
            map.push_back(static_cast<std::uint16_t>(*p.find(l.id)));
        }
        return map;
    };
    const auto map1 = remap(s1, palette1);
    const auto map2 = remap(s2, palette2);

    const std::uint64_t n = config.n_trials;
    log.records.resize(n);
    const std::uint64_t blocks = (n + kTrialBlock - 1) / kTrialBlock;
    const std::uint64_t trial_seed = derive_seed(config.seed, 3);
    const bool predictive = config.definition == RetardedDefinition::Predictive;
    detail::for_each_block(blocks, workers, [&](std::size_t block) {
        Rng rng(derive_seed(trial_seed, block));
        const std::uint64_t begin = block * kTrialBlock;
        const std::uint64_t end = std::min(n, begin + kTrialBlock);
        for (std::uint64_t k = begin; k < end; ++k) {
            const double t = first + static_cast<double>(k) * config.spacing;
            TrialRecord& r = log.records[k];
            r.trial_id = k;
            r.t1 = t;
            r.t2 = t;
            r.a = map1[s1.index_at(r.t1)];
            r.b = map2[s2.index_at(r.t2)];
            if (predictive) {
                r.a_r = map1[s1.index_without_late_interventions(r.t1, r.t2 - light)];
                r.b_r = map2[s2.index_without_late_interventions(r.t2, r.t1 - light)];
            } else {
                r.a_r = map1[s1.index_at(r.t2 - light)];
                r.b_r = map2[s2.index_at(r.t1 - light)];
            }
            const auto d = model->draw(palette1[r.a].angle, palette2[r.b].angle,
                                       palette1[r.a_r].angle, palette2[r.b_r].angle, rng);
            r.outcome_a = static_cast<std::int8_t>(d.a);
            r.outcome_b = static_cast<std::int8_t>(d.b);
            if (d.lambda) r.lambda = *d.lambda;
        }
    });

    result.table = build_table(log, config.min_count);

    std::array<std::uint64_t, 4> classes{};
    std::map<std::pair<std::uint16_t, std::uint16_t>, std::uint64_t> retarded_counts;
    for (const auto& r : log.records) {
        ++classes[static_cast<std::size_t>(
            classify_trial(log.a(r), log.a_r(r), log.b(r), log.b_r(r)))];
        ++retarded_counts[{r.a_r, r.b_r}];
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
        result.classification[static_cast<EqualityClass>(i)] =
            static_cast<double>(classes[i]) / static_cast<double>(n);
    }
    for (const auto& [key, count] : retarded_counts) {
        result.retarded_weights[{palette1[key.first].id, palette2[key.second].id}] =
            static_cast<double>(count) / static_cast<double>(n);
    }
    result.independence = independence_test(log);

    const auto probabilities = ch_probabilities(log, config.min_count);
    auto quartet = [](const StationSpec& s) {
        if (!s.quartet.empty()) return s.quartet;
        return std::vector<std::string>{s.labels[0].id, s.labels[1].id};
    };
    evaluate_reports(result.table.correlations(), &probabilities, result.retarded_weights,
                     result.independence.independent, palette1, palette2,
                     quartet(config.station1), quartet(config.station2), result.reports,
                     result.skipped);
    return result;
}

std::size_t audit_retarded(const ScenarioResult& result, const ScenarioConfig& config) {
    const auto& log = result.log;
    std::size_t mismatches = 0;
    for (const auto& r : log.records) {
        Geometry g = config.geometry;
        g.t1 = r.t1;
        g.t2 = r.t2;
        const SettingLabel* a_r;
        const SettingLabel* b_r;
        if (config.definition == RetardedDefinition::Simple) {
            a_r = &simple_retarded(*result.schedule1, r.t2, g);
            b_r = &simple_retarded(*result.schedule2, r.t1, g);
        } else {
            a_r = &predictive_retarded(*result.schedule1, r.t1, r.t2, g);
            b_r = &predictive_retarded(*result.schedule2, r.t2, r.t1, g);
        }
        const bool same = a_r->id == log.a_r(r).id && b_r->id == log.b_r(r).id &&
                          result.schedule1->value_at(r.t1).id == log.a(r).id &&
                          result.schedule2->value_at(r.t2).id == log.b(r).id;
        mismatches += !same;
    }
    return mismatches;
}

void write_outputs(const ScenarioResult& result, const ScenarioConfig& config,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&dir](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw ConfigError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("trials.csv");
        write_trial_log_csv(out, result.log);
    }
    {
        auto out = open("table.csv");
        write_table_csv(out, result.table);
    }
    {
        auto out = open("reports.json");
        out << reports_json(result.reports, result.skipped).dump(2) << '\n';
    }
    {
        auto out = open("summary.json");
        out << summary_json(result, config).dump(2) << '\n';
    }
}

}  // namespace rbl
