#include "rbl/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rbl/angles.hpp"
#include "rbl/errors.hpp"
#include "rbl/estimation.hpp"
#include "rbl/inequalities.hpp"
#include "rbl/optimizer.hpp"
#include "rbl/scenarios.hpp"
#include "rbl/serialize.hpp"
#include "rbl/verify.hpp"
#include "text.hpp"

namespace rbl {

namespace {

// The eight setting flags; angles for `analytic`/`optimize`, label ids for `check`.
struct SettingFlags {
    std::optional<std::string> a, a2, b, b2, ar, a2r, br, b2r;

    void attach(CLI::App& app, const std::string& what) {
        app.add_option("--a", a, "setting a (" + what + ")");
        app.add_option("--a2", a2, "setting a' (" + what + ")");
        app.add_option("--b", b, "setting b (" + what + ")");
        app.add_option("--b2", b2, "setting b' (" + what + ")");
        app.add_option("--ar", ar, "retarded a_r (" + what + ")");
        app.add_option("--a2r", a2r, "retarded a'_r (" + what + ")");
        app.add_option("--br", br, "retarded b_r (" + what + ")");
        app.add_option("--b2r", b2r, "retarded b'_r (" + what + ")");
    }
};

double required_angle(const std::optional<std::string>& v, const char* flag) {
    if (!v) throw ConfigError(std::string("missing ") + flag);
    return parse_angle(*v);
}

std::string summary_line(const InequalityReport& r) {
    return r.name + " value=" + text::fixed6(r.value) + " bounds=[" + text::fixed6(r.lower) +
           ", " + text::fixed6(r.upper) + "] verdict=" + std::string(to_string(r.verdict));
}

int exit_for(const InequalityReport& r) {
    return r.verdict == Verdict::Violated ? kExitViolated : kExitOk;
}

// Builds the octuple from angle flags; unspecified retarded settings follow
// the kind's default (tied to the actual settings, or (a, b) for same-retarded).
Octuple analytic_octuple(const SettingFlags& f, std::string_view kind) {
    const bool two_sided = kind != "both_equal" && kind != "one_end_equal";
    SettingLabel a("a", required_angle(f.a, "--a"));
    SettingLabel b("b", required_angle(f.b, "--b"));
    SettingLabel a2 = two_sided ? SettingLabel("a'", required_angle(f.a2, "--a2")) : a;
    SettingLabel b2 = (two_sided || kind == "one_end_equal")
                          ? SettingLabel("b'", required_angle(f.b2, "--b2"))
                          : b;
    Octuple s = kind == "same_retarded_chsh" ? Octuple::same_retarded(a, a2, b, b2)
                                             : Octuple::tied(a, a2, b, b2);
    if (kind == "retarded_chsh" || kind == "retarded_ch") {
        if (f.ar) s.a_r = SettingLabel("a_r", parse_angle(*f.ar));
        if (f.a2r) s.a2_r = SettingLabel("a'_r", parse_angle(*f.a2r));
        if (f.br) s.b_r = SettingLabel("b_r", parse_angle(*f.br));
        if (f.b2r) s.b2_r = SettingLabel("b'_r", parse_angle(*f.b2r));
    }
    if (kind == "one_end_equal") {
        s.a_r = s.a2_r = a;
        s.a2 = a;
        s.b_r = f.br ? SettingLabel("b_r", parse_angle(*f.br)) : b;
        s.b2_r = f.b2r ? SettingLabel("b'_r", parse_angle(*f.b2r)) : b2;
    }
    return s;
}

// Same shape as above but with label ids for stored tables.
Octuple check_octuple(const SettingFlags& f, std::string_view kind) {
    auto id = [](const std::optional<std::string>& v, const char* fallback) {
        return SettingLabel(v ? *v : fallback, 0.0);
    };
    const auto a = id(f.a, "a"), a2 = id(f.a2, "a'"), b = id(f.b, "b"), b2 = id(f.b2, "b'");
    Octuple s = kind == "same_retarded_chsh" ? Octuple::same_retarded(a, a2, b, b2)
                                             : Octuple::tied(a, a2, b, b2);
    if (kind == "retarded_chsh" || kind == "retarded_ch") {
        if (f.ar) s.a_r = id(f.ar, "");
        if (f.a2r) s.a2_r = id(f.a2r, "");
        if (f.br) s.b_r = id(f.br, "");
        if (f.b2r) s.b2_r = id(f.b2r, "");
    }
    if (kind == "one_end_equal") {
        s.a2 = s.a_r = s.a2_r = a;
        s.b_r = f.br ? id(f.br, "") : b;
        s.b2_r = f.b2r ? id(f.b2r, "") : b2;
    }
    return s;
}

InequalityReport evaluate_kind(std::string_view kind, const CorrelationInput* e,
                               const ProbabilityInput* p, const Octuple& s) {
    if (kind == "retarded_ch") {
        if (p == nullptr) throw ConfigError("retarded_ch needs probabilities (use --log)");
        return retarded_ch(*p, s);
    }
    if (e == nullptr) throw ConfigError("correlations unavailable");
    if (kind == "chsh") {
        auto r = retarded_chsh(*e, s);
        r.name = "chsh";
        return r;
    }
    if (kind == "retarded_chsh") return retarded_chsh(*e, s);
    if (kind == "same_retarded_chsh") return same_retarded_chsh(*e, s.a, s.a2, s.b, s.b2);
    if (kind == "both_equal") return both_equal_reduction(*e, s.a, s.b);
    if (kind == "one_end_equal") return one_end_equal_chsh(*e, s.a, s.b, s.b2, s.b_r, s.b2_r);
    throw ConfigError("unknown inequality kind '" + std::string(kind) + "'");
}

const std::vector<std::string> kKinds{"chsh",       "retarded_chsh", "same_retarded_chsh",
                                      "retarded_ch", "both_equal",   "one_end_equal"};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bell-experiment simulator with retarded settings"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // run
    auto* run = app.add_subcommand("run", "run a scenario config");
    std::string config_path, out_dir = "rbl-out", definition;
    std::optional<std::uint64_t> seed, n_trials, min_count;
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--seed", seed, "override [run] seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--n", n_trials, "override [run] n_trials");
    run->add_option("--min-count", min_count, "override [run] min_count");
    run->add_option("--definition", definition, "retarded definition")
        ->check(CLI::IsMember({"simple", "predictive"}));

    // analytic
    auto* analytic = app.add_subcommand("analytic", "evaluate an inequality in closed form");
    std::string model_name, kind;
    std::size_t nodes = kDefaultQuadratureNodes;
    SettingFlags analytic_flags;
    std::string model_pos, kind_pos;
    analytic->add_option("MODEL", model_pos, "model name");
    analytic->add_option("KIND", kind_pos, "inequality kind");
    analytic->add_option("--model", model_name, "model name");
    analytic->add_option("--ineq", kind, "inequality kind");
    analytic->add_option("--nodes", nodes, "quadrature nodes for models without a closed form");
    analytic_flags.attach(*analytic, "angle, e.g. pi/4 or 0.785");

    // optimize
    auto* optimize_cmd = app.add_subcommand("optimize", "extremize an inequality expression");
    std::string spec_path, pattern = "tied", direction = "minimize", free_list, opt_out;
    std::optional<double> grid_step;
    SettingFlags optimize_flags;
    optimize_cmd->add_option("--spec", spec_path, "objective spec JSON");
    optimize_cmd->add_option("--model", model_name, "model name");
    optimize_cmd->add_option("--ineq", kind, "inequality kind");
    optimize_cmd->add_option("--pattern", pattern, "retarded pattern: fixed|tied|free");
    optimize_cmd->add_option("--direction", direction, "minimize|maximize");
    optimize_cmd->add_option("--free", free_list, "comma-separated free variables");
    optimize_cmd->add_option("--grid-step", grid_step, "coarse grid resolution (radians)");
    optimize_cmd->add_option("--out", opt_out, "also write the optimum JSON here");
    optimize_flags.attach(*optimize_cmd, "starting or fixed angle");

    // check
    auto* check = app.add_subcommand("check", "evaluate an inequality over stored data");
    std::string table_path, log_path;
    std::optional<std::uint64_t> check_min_count;
    SettingFlags check_flags;
    check->add_option("--table", table_path, "correlation table CSV");
    check->add_option("--log", log_path, "trial log CSV");
    check->add_option("--ineq", kind, "inequality kind")->required();
    check->add_option("--min-count", check_min_count, "minimum trials per cell");
    check_flags.attach(*check, "label id");

    // verify
    auto* verify = app.add_subcommand("verify", "run the identity and invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*run) {
            auto cfg = load_config(config_path);
            if (seed) cfg.seed = *seed;
            if (n_trials) cfg.n_trials = *n_trials;
            if (min_count) cfg.min_count = *min_count;
            if (definition == "simple") cfg.definition = RetardedDefinition::Simple;
            if (definition == "predictive") cfg.definition = RetardedDefinition::Predictive;
            cfg.validate();
            const auto result = run_scenario(cfg);
            write_outputs(result, cfg, out_dir);
            for (const auto& r : result.reports) err << summary_line(r) << '\n';
            for (const auto& [cls, f] : result.classification) {
                err << to_string(cls) << ' ' << text::fixed6(f) << '\n';
            }
            out << summary_json(result, cfg).dump(2) << '\n';
            return result.any_violated() ? kExitViolated : kExitOk;
        }
        if (*analytic) {
            if (model_name.empty()) model_name = model_pos;
            if (kind.empty()) kind = kind_pos;
            if (model_name.empty() || kind.empty()) {
                throw ConfigError("analytic needs a model and an inequality kind");
            }
            if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
                throw ConfigError("unknown inequality kind '" + kind + "'");
            }
            const auto model = make_model(model_name);
            const auto s = analytic_octuple(analytic_flags, kind);
            const auto e = analytic_chsh_input(*model, s, nodes);
            std::optional<ProbabilityInput> p;
            if (kind == "retarded_ch") p = analytic_ch_input(*model, s, nodes);
            const auto report = evaluate_kind(kind, &e, p ? &*p : nullptr, s);
            err << summary_line(report) << '\n';
            out << to_json(report).dump(2) << '\n';
            return exit_for(report);
        }
        if (*optimize_cmd) {
            ObjectiveSpec spec;
            if (!spec_path.empty()) {
                std::ifstream in(spec_path);
                if (!in) throw ConfigError("cannot open objective spec '" + spec_path + "'");
                nlohmann::json j;
                try {
                    in >> j;
                } catch (const nlohmann::json::exception& e) {
                    throw ConfigError(std::string("objective spec: ") + e.what());
                }
                spec = objective_from_json(j);
            } else {
                if (!model_name.empty()) spec.model = model_name;
                if (!kind.empty()) spec.kind = parse_inequality_kind(kind);
                spec.pattern = parse_retarded_pattern(pattern);
                spec.direction = parse_direction(direction);
                if (free_list.empty()) free_list = "a,a2,b,b2";
                for (auto v : text::split(free_list, ',')) {
                    spec.free.push_back(parse_variable(text::trim(v)));
                }
                const std::optional<std::string>* flags[] = {
                    &optimize_flags.a,  &optimize_flags.a2,  &optimize_flags.b,
                    &optimize_flags.b2, &optimize_flags.ar,  &optimize_flags.a2r,
                    &optimize_flags.br, &optimize_flags.b2r};
                for (std::size_t i = 0; i < kVariableCount; ++i) {
                    if (*flags[i]) spec.values[i] = parse_angle(**flags[i]);
                }
            }
            if (grid_step) spec.grid_step = *grid_step;
            const auto opt = rbl::optimize(spec);
            const auto j = to_json(opt);
            if (!opt_out.empty()) {
                std::ofstream f(opt_out);
                if (!f) throw ConfigError("cannot write " + opt_out);
                f << j.dump(2) << '\n';
            }
            err << to_string(spec.kind) << " optimum=" << text::fixed6(opt.value) << '\n';
            out << j.dump(2) << '\n';
            return kExitOk;
        }
        if (*check) {
            if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
                throw ConfigError("unknown inequality kind '" + kind + "'");
            }
            if (table_path.empty() == log_path.empty()) {
                throw ConfigError("check needs exactly one of --table or --log");
            }
            CorrelationInput e;
            std::optional<ProbabilityInput> p;
            if (!table_path.empty()) {
                std::ifstream in(table_path);
                if (!in) throw ConfigError("cannot open table '" + table_path + "'");
                e = read_table_csv(in, check_min_count).correlations();
            } else {
                std::ifstream in(log_path);
                if (!in) throw ConfigError("cannot open trial log '" + log_path + "'");
                const auto log = read_trial_log_csv(in);
                const auto mc = check_min_count.value_or(kDefaultMinCount);
                e = build_table(log, mc).correlations();
                p = ch_probabilities(log, mc);
            }
            const auto s = check_octuple(check_flags, kind);
            const auto report = evaluate_kind(kind, &e, p ? &*p : nullptr, s);
            err << summary_line(report) << '\n';
            out << to_json(report).dump(2) << '\n';
            return exit_for(report);
        }
        if (*verify) {
            bool all = true;
            for (const auto& item : run_verification()) {
                all = all && item.pass;
                out << (item.pass ? "PASS " : "FAIL ") << item.name;
                if (!item.detail.empty()) out << " (" << item.detail << ')';
                out << '\n';
            }
            out << (all ? "verify: all checks passed" : "verify: FAILED") << '\n';
            return all ? kExitOk : kExitError;
        }
    } catch (const MissingCellError& e) {
        err << "insufficient data: " << e.what() << '\n';
        return kExitInsufficient;
    } catch (const InsufficientDataError& e) {
        err << "insufficient data: " << e.what() << '\n';
        return kExitInsufficient;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace rbl
