#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbl/rng.hpp"

namespace rbl {

// Hidden-variable space Γ: an interval [lower, upper) with uniform density.
// `circular` marks Γ as the circle, where λ is an angle identified mod the period.
struct HiddenSpace {
    double lower = 0.0;
    double upper = 1.0;
    bool circular = false;

    static HiddenSpace circle();
    static HiddenSpace interval(double lower, double upper);

    double width() const noexcept { return upper - lower; }
    double density(double lambda) const noexcept;
    double sample(Rng& rng) const noexcept;
};

// One sampled trial: both ±1 outcomes, plus λ when the model is local.
struct Draw {
    int a = 1;
    int b = 1;
    std::optional<double> lambda;
};

// Probabilities of a +1 outcome: jointly, and at each end alone.
struct ChProbabilities {
    double joint_plus = 0.0;  // p12(a, b | a_r, b_r)
    double p1 = 0.0;          // p1(a | b_r)
    double p2 = 0.0;          // p2(b | a_r)
};

class Model {
public:
    virtual ~Model() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual bool is_local() const noexcept = 0;

    virtual std::optional<double> closed_form_e(double a, double b, double a_r,
                                                double b_r) const {
        (void)a, (void)b, (void)a_r, (void)b_r;
        return std::nullopt;
    }
    virtual std::optional<ChProbabilities> closed_form_ch(double a, double b, double a_r,
                                                          double b_r) const {
        (void)a, (void)b, (void)a_r, (void)b_r;
        return std::nullopt;
    }

    virtual Draw draw(double a, double b, double a_r, double b_r, Rng& rng) const = 0;
};

// Deterministic local model: A(a, b_r, λ) and B(b, a_r, λ). The far setting
// enters only through its retarded value.
class DeterministicLhv : public Model {
public:
    explicit DeterministicLhv(HiddenSpace hidden) : hidden_(hidden) {}

    bool is_local() const noexcept final { return true; }
    const HiddenSpace& hidden() const noexcept { return hidden_; }

    virtual int outcome_a(double a, double b_r, double lambda) const = 0;
    virtual int outcome_b(double b, double a_r, double lambda) const = 0;

    Draw draw(double a, double b, double a_r, double b_r, Rng& rng) const override;

private:
    HiddenSpace hidden_;
};

// Stochastic local model: probabilities p1(a, b_r|λ), p2(b, a_r|λ) of +1.
class StochasticLhv {
public:
    virtual ~StochasticLhv() = default;
    virtual const HiddenSpace& hidden() const noexcept = 0;
    virtual double p1(double a, double b_r, double lambda) const = 0;
    virtual double p2(double b, double a_r, double lambda) const = 0;
};

// Deterministic model seen as a stochastic one, p = (1 + outcome) / 2.
class LiftedLhv final : public StochasticLhv {
public:
    explicit LiftedLhv(const DeterministicLhv& model) : model_(model) {}

    const HiddenSpace& hidden() const noexcept override { return model_.hidden(); }
    double p1(double a, double b_r, double lambda) const override {
        return 0.5 * (1 + model_.outcome_a(a, b_r, lambda));
    }
    double p2(double b, double a_r, double lambda) const override {
        return 0.5 * (1 + model_.outcome_b(b, a_r, lambda));
    }

private:
    const DeterministicLhv& model_;
};

// --- the singlet model with retarded settings ------------------------------

struct HardyThetas {
    double left = 0.0;   // θ_L(a, b_r)
    double right = 0.0;  // θ_R(b, a_r)
};

// θ_L = -(π/4)(1 + cos(a - b_r)), θ_R = (π/4)(1 + cos(a_r - b)), not reduced mod 2π.
HardyThetas hardy_thetas(double a, double b, double a_r, double b_r) noexcept;

// +1 when λ is in the half circle [θ, θ + π) (mod 2π), -1 on [θ + π, θ + 2π).
int hardy_outcome_a(double a, double b_r, double lambda) noexcept;
int hardy_outcome_b(double b, double a_r, double lambda) noexcept;

// E(a, b | a_r, b_r) = -(cos(a - b_r) + cos(a_r - b)) / 2.
double hardy_closed_form_e(double a, double b, double a_r, double b_r) noexcept;

class HardySingletModel final : public DeterministicLhv {
public:
    static constexpr std::string_view kName = "hardy-singlet";

    HardySingletModel() : DeterministicLhv(HiddenSpace::circle()) {}

    std::string_view name() const noexcept override { return kName; }
    int outcome_a(double a, double b_r, double lambda) const override {
        return hardy_outcome_a(a, b_r, lambda);
    }
    int outcome_b(double b, double a_r, double lambda) const override {
        return hardy_outcome_b(b, a_r, lambda);
    }
    std::optional<double> closed_form_e(double a, double b, double a_r,
                                        double b_r) const override {
        return hardy_closed_form_e(a, b, a_r, b_r);
    }
    // Outcomes have zero mean at each end, so p1 = p2 = 1/2 and p12 = (1 + E)/4.
    std::optional<ChProbabilities> closed_form_ch(double a, double b, double a_r,
                                                  double b_r) const override;
};

// --- quantum reference -----------------------------------------------------

// Outcome probabilities ordered (++, +-, -+, --).
using JointProbabilities = std::array<double, 4>;

// Singlet, spin along xy-plane angles a and b: E = -cos(a - b).
double quantum_e(double a, double b) noexcept;
JointProbabilities quantum_joint_probs(double a, double b) noexcept;
std::pair<int, int> quantum_sample_pair(double a, double b, Rng& rng) noexcept;

// Nonlocal oracle; ignores the retarded arguments and exposes no λ functions.
class QuantumSinglet final : public Model {
public:
    static constexpr std::string_view kName = "quantum-singlet";

    std::string_view name() const noexcept override { return kName; }
    bool is_local() const noexcept override { return false; }
    std::optional<double> closed_form_e(double a, double b, double,
                                        double) const override {
        return quantum_e(a, b);
    }
    std::optional<ChProbabilities> closed_form_ch(double a, double b, double,
                                                  double) const override {
        return ChProbabilities{quantum_joint_probs(a, b)[0], 0.5, 0.5};
    }
    Draw draw(double a, double b, double, double, Rng& rng) const override;
};

// Registry. Accepts the canonical names and the short aliases "hardy" and "quantum".
std::shared_ptr<const Model> make_model(std::string_view name);
std::vector<std::string> model_names();

}  // namespace rbl
