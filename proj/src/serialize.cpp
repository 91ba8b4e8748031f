#include "rbl/serialize.hpp"

#include <cmath>
#include <set>

#include "rbl/errors.hpp"
#include "rbl/optimizer.hpp"
#include "rbl/scenarios.hpp"

namespace rbl {

namespace {

nlohmann::json number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

nlohmann::json label_json(const SettingLabel& l) { return {{"label", l.id}, {"angle", l.angle}}; }

nlohmann::json octuple_json(const Octuple& s) {
    return {{"a", label_json(s.a)},     {"a2", label_json(s.a2)},
            {"b", label_json(s.b)},     {"b2", label_json(s.b2)},
            {"a_r", label_json(s.a_r)}, {"a2_r", label_json(s.a2_r)},
            {"b_r", label_json(s.b_r)}, {"b2_r", label_json(s.b2_r)}};
}

}  // namespace

nlohmann::json to_json(const InequalityReport& r) {
    nlohmann::json j{{"name", r.name},
                     {"value", r.value},
                     {"lower", r.lower},
                     {"upper", r.upper},
                     {"verdict", to_string(r.verdict)},
                     {"margin_sigma", number(r.margin_sigma)},
                     {"inputs", octuple_json(r.inputs)},
                     {"side", to_string(r.side)},
                     {"combined_se", r.combined_se},
                     {"source", to_string(r.source)}};
    if (r.settings_independent) j["settings_independent"] = *r.settings_independent;
    return j;
}

nlohmann::json reports_json(const std::vector<InequalityReport>& reports,
                            const std::vector<SkippedReport>& skipped) {
    nlohmann::json out{{"reports", nlohmann::json::array()}, {"skipped", nlohmann::json::array()}};
    for (const auto& r : reports) out["reports"].push_back(to_json(r));
    for (const auto& s : skipped) {
        out["skipped"].push_back(
            {{"name", s.name}, {"inputs", octuple_json(s.inputs)}, {"reason", s.reason}});
    }
    return out;
}

nlohmann::json summary_json(const ScenarioResult& result, const ScenarioConfig& config) {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [cls, fraction] : result.classification) {
        classes[std::string(to_string(cls))] = fraction;
    }
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& [key, w] : result.retarded_weights) {
        weights.push_back({{"a_r", key.first}, {"b_r", key.second}, {"p", w}});
    }
    std::size_t violated = 0;
    for (const auto& r : result.reports) violated += r.verdict == Verdict::Violated;
    return {{"model", config.model},
            {"definition", to_string(config.definition)},
            {"n_trials", config.n_trials},
            {"seed", config.seed},
            {"classification", classes},
            {"retarded_weights", weights},
            {"independence",
             {{"statistic", result.independence.statistic},
              {"degrees_of_freedom", result.independence.degrees_of_freedom},
              {"critical_value", result.independence.critical_value},
              {"independent", result.independence.independent}}},
            {"reports", result.reports.size()},
            {"skipped", result.skipped.size()},
            {"violated", violated}};
}

nlohmann::json to_json(const Optimum& o) {
    nlohmann::json settings = nlohmann::json::object();
    for (std::size_t i = 0; i < kVariableCount; ++i) {
        settings[std::string(to_string(static_cast<Variable>(i)))] = o.settings[i];
    }
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [it, v] : o.trace) trace.push_back({it, v});
    return {{"settings", settings},
            {"value", o.value},
            {"evaluations", o.evaluations},
            {"grid_step", o.grid_step},
            {"trace", trace}};
}

ObjectiveSpec objective_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"model",    "inequality", "pattern",
                                             "direction", "values",    "free",
                                             "grid_step", "min_step",  "grid_budget",
                                             "quadrature_nodes"};
    ObjectiveSpec spec;
    try {
        if (!j.is_object()) throw ConfigError("objective spec must be a JSON object");
        for (const auto& [key, _] : j.items()) {
            if (!known.contains(key)) throw ConfigError("unknown objective key '" + key + "'");
        }
        if (j.contains("model")) spec.model = j.at("model").get<std::string>();
        if (j.contains("inequality")) {
            spec.kind = parse_inequality_kind(j.at("inequality").get<std::string>());
        }
        if (j.contains("pattern")) {
            spec.pattern = parse_retarded_pattern(j.at("pattern").get<std::string>());
        }
        if (j.contains("direction")) {
            spec.direction = parse_direction(j.at("direction").get<std::string>());
        }
        if (j.contains("values")) {
            for (const auto& [key, v] : j.at("values").items()) {
                spec.values[static_cast<std::size_t>(parse_variable(key))] = v.get<double>();
            }
        }
        if (j.contains("free")) {
            for (const auto& v : j.at("free")) spec.free.push_back(parse_variable(v.get<std::string>()));
        }
        if (j.contains("grid_step")) spec.grid_step = j.at("grid_step").get<double>();
        if (j.contains("min_step")) spec.min_step = j.at("min_step").get<double>();
        if (j.contains("grid_budget")) spec.grid_budget = j.at("grid_budget").get<std::uint64_t>();
        if (j.contains("quadrature_nodes")) {
            spec.quadrature_nodes = j.at("quadrature_nodes").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("objective spec: ") + e.what());
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(std::string("objective spec: ") + e.what());
    }
    return spec;
}

}  // namespace rbl
