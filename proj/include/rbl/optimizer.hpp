#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbl/angles.hpp"
#include "rbl/estimation.hpp"
#include "rbl/models.hpp"

namespace rbl {

// The eight angles of an octuple, in this order.
enum class Variable { A, A2, B, B2, AR, A2R, BR, B2R };
inline constexpr std::size_t kVariableCount = 8;
using Angles = std::array<double, kVariableCount>;

std::string_view to_string(Variable v) noexcept;
Variable parse_variable(std::string_view name);  // "a", "a2", "b", "b2", "ar", "a2r", "br", "b2r"

// `Chsh` is the retarded CHSH expression with every retarded setting tied to
// the actual one, i.e. the standard CHSH expression.
enum class InequalityKind { Chsh, RetardedChsh, SameRetardedChsh, RetardedCh };
enum class RetardedPattern { Fixed, Tied, Free };
enum class Direction { Minimize, Maximize };

std::string_view to_string(InequalityKind k) noexcept;
std::string_view to_string(RetardedPattern p) noexcept;
std::string_view to_string(Direction d) noexcept;
InequalityKind parse_inequality_kind(std::string_view name);
RetardedPattern parse_retarded_pattern(std::string_view name);
Direction parse_direction(std::string_view name);

struct ObjectiveSpec {
    std::string model = std::string(QuantumSinglet::kName);
    InequalityKind kind = InequalityKind::Chsh;
    RetardedPattern pattern = RetardedPattern::Tied;
    Direction direction = Direction::Minimize;
    Angles values{};              // starting values; the fixed values of non-free variables
    std::vector<Variable> free;   // searched variables
    double grid_step = kPi / 24;  // coarse-grid resolution
    double min_step = 1e-7;       // pattern search stops below this step
    std::uint64_t grid_budget = 8'000'000;  // max grid points before the grid is coarsened
    std::size_t quadrature_nodes = 10'000;  // for local models without a closed form

    // Throws InvalidArgumentError for inconsistent specs.
    void validate() const;
};

struct Optimum {
    Angles settings{};  // rotated so that a = 0, all angles in [0, 2π)
    double value = 0.0;
    std::uint64_t evaluations = 0;
    double grid_step = 0.0;  // resolution actually used
    std::vector<std::pair<std::uint64_t, double>> trace;  // (iteration, best value)
};

// Expression value at `angles` after applying the spec's retarded pattern.
// Throws UnsupportedModelError when the model offers neither a closed form nor
// λ functions.
double evaluate_objective(const ObjectiveSpec& spec, const Model& model, const Angles& angles);

// Coarse grid over the free angles followed by a compass pattern search whose
// step halves whenever no neighbour improves.
Optimum optimize(const ObjectiveSpec& spec, unsigned workers = default_workers());

}  // namespace rbl
