#include <fstream>
#include <functional>
#include <istream>
#include <set>

#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/scenarios.hpp"
#include "text.hpp"

namespace rbl {

namespace {

std::vector<std::string> id_list(std::string_view value) {
    std::vector<std::string> out;
    for (auto part : text::split(value, ',')) {
        const auto id = text::trim(part);
        if (id.empty()) throw ConfigError("empty label id in list");
        out.emplace_back(id);
    }
    return out;
}

// "a:pi/2, a':0"
std::vector<SettingLabel> label_list(std::string_view value) {
    std::vector<SettingLabel> out;
    Palette seen;
    for (auto part : text::split(value, ',')) {
        const auto item = text::trim(part);
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("label '" + std::string(item) + "' needs the form id:angle");
        }
        SettingLabel label(std::string(text::trim(item.substr(0, colon))),
                           parse_angle(item.substr(colon + 1)));
        if (label.id.empty()) throw ConfigError("empty label id");
        if (seen.find(label.id)) throw ConfigError("duplicate label '" + label.id + "'");
        seen.intern(label);
        out.push_back(std::move(label));
    }
    return out;
}

ScheduleKind schedule_kind(std::string_view v) {
    if (v == "periodic") return ScheduleKind::Periodic;
    if (v == "random_switch") return ScheduleKind::RandomSwitch;
    if (v == "stream") return ScheduleKind::Stream;
    throw ConfigError("unknown schedule kind '" + std::string(v) + "'");
}

std::uint64_t non_negative(std::string_view v, std::string_view what) {
    const auto x = text::to_int(v, what);
    if (x < 0) throw ConfigError(std::string(what) + " must be >= 0");
    return static_cast<std::uint64_t>(x);
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    ScenarioConfig cfg;
    using Setter = std::function<void(std::string_view)>;
    auto station_keys = [&base_dir](StationSpec& s) {
        return std::map<std::string, Setter, std::less<>>{
            {"labels", [&s](auto v) { s.labels = label_list(v); }},
            {"schedule", [&s](auto v) { s.kind = schedule_kind(v); }},
            {"period", [&s](auto v) { s.period = text::to_double(v, "period"); }},
            {"phase", [&s](auto v) { s.phase = text::to_double(v, "phase"); }},
            {"cycle", [&s](auto v) { s.cycle = id_list(v); }},
            {"rate", [&s](auto v) { s.rate = text::to_double(v, "rate"); }},
            {"initial", [&s](auto v) { s.initial = std::string(v); }},
            {"file", [&s, &base_dir](auto v) {
                 const std::filesystem::path p{std::string(v)};
                 s.file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
             }},
            {"quartet", [&s](auto v) { s.quartet = id_list(v); }},
        };
    };
    std::map<std::string, std::map<std::string, Setter, std::less<>>, std::less<>> sections{
        {"geometry",
         {{"L", [&](auto v) { cfg.geometry.separation = text::to_double(v, "L"); }},
          {"c", [&](auto v) { cfg.geometry.signal_speed = text::to_double(v, "c"); }},
          {"t0", [&](auto v) { cfg.geometry.t0 = text::to_double(v, "t0"); }}}},
        {"model", {{"name", [&](auto v) { cfg.model = std::string(v); }}}},
        {"station1", station_keys(cfg.station1)},
        {"station2", station_keys(cfg.station2)},
        {"run",
         {{"definition",
           [&](auto v) {
               if (v == "simple") {
                   cfg.definition = RetardedDefinition::Simple;
               } else if (v == "predictive") {
                   cfg.definition = RetardedDefinition::Predictive;
               } else {
                   throw ConfigError("definition must be simple or predictive");
               }
           }},
          {"delay", [&](auto v) { cfg.delay = text::to_double(v, "delay"); }},
          {"n_trials", [&](auto v) { cfg.n_trials = non_negative(v, "n_trials"); }},
          {"spacing", [&](auto v) { cfg.spacing = text::to_double(v, "spacing"); }},
          {"start", [&](auto v) { cfg.start = text::to_double(v, "start"); }},
          {"seed", [&](auto v) { cfg.seed = non_negative(v, "seed"); }},
          {"min_count", [&](auto v) { cfg.min_count = non_negative(v, "min_count"); }}}},
    };

    std::string line;
    std::string section;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "config line " + std::to_string(lineno) + ": ";
        auto body = std::string_view(line);
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            body = body.substr(0, hash);
        }
        body = text::trim(body);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(where + "malformed section header");
            section = std::string(text::trim(body.substr(1, body.size() - 2)));
            if (!sections.contains(section)) {
                throw ConfigError(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const auto key = text::trim(body.substr(0, eq));
        const auto value = text::trim(body.substr(eq + 1));
        auto& keys = sections.find(section)->second;
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw ConfigError(where + "unknown key '" + std::string(key) + "' in [" + section + "]");
        }
        if (!seen.insert(section + "." + std::string(key)).second) {
            throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        }
        try {
            it->second(value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        } catch (const Error& e) {
            throw ConfigError(where + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

double ScenarioConfig::first_trial_time() const {
    return start ? *start : geometry.t0 + geometry.light_delay() + spacing;
}

double ScenarioConfig::last_trial_time() const {
    return first_trial_time() + static_cast<double>(n_trials - 1) * spacing;
}

void ScenarioConfig::validate() const {
    if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
    if (!(spacing > 0.0)) throw ConfigError("spacing must be positive");
    if (!(delay >= 0.0)) throw ConfigError("delay must be >= 0");
    if (!(geometry.separation > 0.0) || !(geometry.signal_speed > 0.0)) {
        throw ConfigError("L and c must be positive");
    }
    if (!(first_trial_time() - geometry.light_delay() > geometry.t0)) {
        throw ConfigError("first trial must come after t0 + L/c");
    }
    for (const auto* s : {&station1, &station2}) {
        const std::string name = s == &station1 ? "station1" : "station2";
        if (s->labels.empty()) throw ConfigError(name + ": labels are required");
        const Palette palette(s->labels);
        for (const auto& id : s->cycle) {
            if (!palette.find(id)) throw ConfigError(name + ": cycle uses unknown label " + id);
        }
        if (!s->initial.empty() && !palette.find(s->initial)) {
            throw ConfigError(name + ": unknown initial label " + s->initial);
        }
        if (!s->quartet.empty()) {
            if (s->quartet.size() != 2) throw ConfigError(name + ": quartet needs two labels");
            for (const auto& id : s->quartet) {
                if (!palette.find(id)) throw ConfigError(name + ": quartet uses unknown label " + id);
            }
        } else if (s->labels.size() < 2) {
            throw ConfigError(name + ": at least two labels are needed for the quartet");
        }
        switch (s->kind) {
            case ScheduleKind::Periodic:
                if (!(s->period > 0.0)) throw ConfigError(name + ": period must be positive");
                break;
            case ScheduleKind::RandomSwitch:
                if (!(s->rate > 0.0)) throw ConfigError(name + ": rate must be positive");
                break;
            case ScheduleKind::Stream:
                if (s->file.empty()) throw ConfigError(name + ": stream schedule needs a file");
                break;
        }
    }
}

}  // namespace rbl
