#pragma once

#include <vector>

#include "json.hpp"
#include "rbl/inequalities.hpp"

namespace rbl {

struct ScenarioConfig;
struct ScenarioResult;
struct SkippedReport;
struct Optimum;
struct ObjectiveSpec;

// Flat object: name, value, lower, upper, verdict, margin_sigma, inputs, plus
// side, combined_se, source and (averaged CHSH) settings_independent.
// Infinite margins are written as the strings "inf" / "-inf".
nlohmann::json to_json(const InequalityReport& report);
nlohmann::json reports_json(const std::vector<InequalityReport>& reports,
                            const std::vector<SkippedReport>& skipped);
nlohmann::json summary_json(const ScenarioResult& result, const ScenarioConfig& config);
nlohmann::json to_json(const Optimum& optimum);

ObjectiveSpec objective_from_json(const nlohmann::json& j);

}  // namespace rbl
