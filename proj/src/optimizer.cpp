#include "rbl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "parallel.hpp"
#include "rbl/errors.hpp"

namespace rbl {

namespace {
constexpr std::string_view kVariableNames[] = {"a", "a2", "b", "b2", "ar", "a2r", "br", "b2r"};
constexpr std::uint64_t kGridChunk = 1u << 15;
constexpr std::uint64_t kMaxSearchIterations = 1'000'000;

std::size_t idx(Variable v) { return static_cast<std::size_t>(v); }
}  // namespace

std::string_view to_string(Variable v) noexcept { return kVariableNames[idx(v)]; }

Variable parse_variable(std::string_view name) {
    for (std::size_t i = 0; i < kVariableCount; ++i) {
        if (kVariableNames[i] == name) return static_cast<Variable>(i);
    }
    throw InvalidArgumentError("unknown variable '" + std::string(name) + "'");
}

std::string_view to_string(InequalityKind k) noexcept {
    switch (k) {
        case InequalityKind::Chsh: return "chsh";
        case InequalityKind::RetardedChsh: return "retarded_chsh";
        case InequalityKind::SameRetardedChsh: return "same_retarded_chsh";
        case InequalityKind::RetardedCh: return "retarded_ch";
    }
    return "unknown";
}

std::string_view to_string(RetardedPattern p) noexcept {
    switch (p) {
        case RetardedPattern::Fixed: return "fixed";
        case RetardedPattern::Tied: return "tied";
        case RetardedPattern::Free: return "free";
    }
    return "unknown";
}

std::string_view to_string(Direction d) noexcept {
    return d == Direction::Minimize ? "minimize" : "maximize";
}

InequalityKind parse_inequality_kind(std::string_view name) {
    for (auto k : {InequalityKind::Chsh, InequalityKind::RetardedChsh,
                   InequalityKind::SameRetardedChsh, InequalityKind::RetardedCh}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgumentError("unknown inequality kind '" + std::string(name) + "'");
}

RetardedPattern parse_retarded_pattern(std::string_view name) {
    for (auto p : {RetardedPattern::Fixed, RetardedPattern::Tied, RetardedPattern::Free}) {
        if (to_string(p) == name) return p;
    }
    throw InvalidArgumentError("unknown retarded pattern '" + std::string(name) + "'");
}

Direction parse_direction(std::string_view name) {
    if (name == "minimize" || name == "min") return Direction::Minimize;
    if (name == "maximize" || name == "max") return Direction::Maximize;
    throw InvalidArgumentError("direction must be minimize or maximize");
}

void ObjectiveSpec::validate() const {
    if (free.empty()) throw InvalidArgumentError("no free variables to optimize");
    std::set<Variable> seen;
    for (auto v : free) {
        if (!seen.insert(v).second) {
            throw InvalidArgumentError("variable '" + std::string(to_string(v)) + "' listed twice");
        }
        const bool retarded = idx(v) >= idx(Variable::AR);
        const bool retarded_free = pattern == RetardedPattern::Free &&
                                   (kind == InequalityKind::RetardedChsh ||
                                    kind == InequalityKind::RetardedCh);
        if (retarded && !retarded_free) {
            throw InvalidArgumentError("retarded variable '" + std::string(to_string(v)) +
                                       "' is only free under the free pattern of a retarded "
                                       "inequality");
        }
    }
    if (!(grid_step > 0.0) || !(min_step > 0.0)) {
        throw InvalidArgumentError("grid and minimum steps must be positive");
    }
    if (grid_budget < 2) throw InvalidArgumentError("grid budget too small");
}

namespace {

// Fills the retarded slots according to the inequality and pattern.
Angles effective(const ObjectiveSpec& spec, Angles x) {
    const bool tie = spec.kind == InequalityKind::Chsh ||
                     ((spec.kind == InequalityKind::RetardedChsh ||
                       spec.kind == InequalityKind::RetardedCh) &&
                      spec.pattern == RetardedPattern::Tied);
    if (tie) {
        x[idx(Variable::AR)] = x[idx(Variable::A)];
        x[idx(Variable::A2R)] = x[idx(Variable::A2)];
        x[idx(Variable::BR)] = x[idx(Variable::B)];
        x[idx(Variable::B2R)] = x[idx(Variable::B2)];
    } else if (spec.kind == InequalityKind::SameRetardedChsh) {
        x[idx(Variable::AR)] = x[idx(Variable::A2R)] = x[idx(Variable::A)];
        x[idx(Variable::BR)] = x[idx(Variable::B2R)] = x[idx(Variable::B)];
    }
    return x;
}

double expression(const ObjectiveSpec& spec, const Model& model, const Angles& x) {
    const double a = x[0], a2 = x[1], b = x[2], b2 = x[3];
    const double ar = x[4], a2r = x[5], br = x[6], b2r = x[7];
    const auto nodes = spec.quadrature_nodes;
    if (spec.kind == InequalityKind::RetardedCh) {
        const auto first = model_ch(model, a2, b2, a2r, b2r, nodes);
        return first.joint_plus + model_ch(model, a2, b, ar, b2r, nodes).joint_plus +
               model_ch(model, a, b2, a2r, br, nodes).joint_plus -
               model_ch(model, a, b, ar, br, nodes).joint_plus - first.p1 - first.p2;
    }
    return model_e(model, a2, b2, a2r, b2r, nodes) + model_e(model, a2, b, ar, b2r, nodes) +
           model_e(model, a, b2, a2r, br, nodes) - model_e(model, a, b, ar, br, nodes);
}

struct Candidate {
    double value;
    std::uint64_t index;
};

}  // namespace

double evaluate_objective(const ObjectiveSpec& spec, const Model& model, const Angles& angles) {
    return expression(spec, model, effective(spec, angles));
}

Optimum optimize(const ObjectiveSpec& spec, unsigned workers) {
    spec.validate();
    const auto model = make_model(spec.model);
    if (!model->is_local() && !model->closed_form_e(0.0, 0.0, 0.0, 0.0)) {
        throw UnsupportedModelError("model '" + spec.model +
                                    "' can only be sampled; optimization needs a closed form or "
                                    "quadrature");
    }
    // Probe once so an unsupported model fails before the grid.
    (void)evaluate_objective(spec, *model, spec.values);

    const bool minimize = spec.direction == Direction::Minimize;
    auto better = [minimize](double lhs, double rhs) { return minimize ? lhs < rhs : lhs > rhs; };

    const std::size_t dims = spec.free.size();
    auto points = static_cast<std::uint64_t>(std::llround(kTwoPi / spec.grid_step));
    points = std::max<std::uint64_t>(points, 1);
    auto total_points = [&](std::uint64_t m) {
        double t = std::pow(static_cast<double>(m), static_cast<double>(dims));
        return t;
    };
    while (points > 1 && total_points(points) > static_cast<double>(spec.grid_budget)) {
        points = static_cast<std::uint64_t>(
            std::floor(std::pow(static_cast<double>(spec.grid_budget), 1.0 / dims)));
        if (total_points(points) > static_cast<double>(spec.grid_budget)) --points;
    }
    const double step = kTwoPi / static_cast<double>(points);
    std::uint64_t grid_size = 1;
    for (std::size_t d = 0; d < dims; ++d) grid_size *= points;

    auto grid_point = [&](std::uint64_t linear) {
        Angles x = spec.values;
        for (auto v : spec.free) {
            x[idx(v)] = static_cast<double>(linear % points) * step;
            linear /= points;
        }
        return x;
    };

    const std::uint64_t chunks = (grid_size + kGridChunk - 1) / kGridChunk;
    std::vector<Candidate> chunk_best(chunks);
    detail::for_each_block(chunks, workers, [&](std::size_t c) {
        const std::uint64_t begin = c * kGridChunk;
        const std::uint64_t end = std::min(grid_size, begin + kGridChunk);
        Candidate best{evaluate_objective(spec, *model, grid_point(begin)), begin};
        for (std::uint64_t i = begin + 1; i < end; ++i) {
            const double v = evaluate_objective(spec, *model, grid_point(i));
            if (better(v, best.value)) best = {v, i};
        }
        chunk_best[c] = best;
    });
    Candidate best = chunk_best.front();
    for (const auto& c : chunk_best) {
        if (better(c.value, best.value)) best = c;
    }

    Optimum opt;
    opt.grid_step = step;
    opt.evaluations = grid_size;
    Angles x = grid_point(best.index);
    double fx = best.value;
    opt.trace.emplace_back(0, fx);

    double h = step;
    std::uint64_t iteration = 0;
    while (h >= spec.min_step && iteration < kMaxSearchIterations) {
        ++iteration;
        Angles best_move = x;
        double best_value = fx;
        for (auto v : spec.free) {
            for (double sign : {1.0, -1.0}) {
                Angles y = x;
                y[idx(v)] += sign * h;
                const double fy = evaluate_objective(spec, *model, y);
                ++opt.evaluations;
                if (better(fy, best_value)) {
                    best_value = fy;
                    best_move = y;
                }
            }
        }
        if (better(best_value, fx)) {
            x = best_move;
            fx = best_value;
            opt.trace.emplace_back(iteration, fx);
        } else {
            h *= 0.5;
        }
    }

    // Report the effective octuple, rotated so that a = 0.
    x = effective(spec, x);
    const double shift = x[idx(Variable::A)];
    for (auto& angle : x) angle = wrap_two_pi(angle - shift);
    opt.settings = x;
    opt.value = evaluate_objective(spec, *model, x);
    ++opt.evaluations;
    return opt;
}

}  // namespace rbl
