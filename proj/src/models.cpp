#include "rbl/models.hpp"

#include <cmath>

#include "rbl/angles.hpp"
#include "rbl/errors.hpp"

namespace rbl {

HiddenSpace HiddenSpace::circle() { return HiddenSpace{0.0, kTwoPi, true}; }

HiddenSpace HiddenSpace::interval(double lower, double upper) {
    if (!(upper > lower)) throw InvalidArgumentError("hidden interval must have positive width");
    return HiddenSpace{lower, upper, false};
}

double HiddenSpace::density(double lambda) const noexcept {
    return (lambda >= lower && lambda < upper) ? 1.0 / width() : 0.0;
}

double HiddenSpace::sample(Rng& rng) const noexcept {
    const double x = rng.uniform(lower, upper);
    return x < upper ? x : lower;
}

Draw DeterministicLhv::draw(double a, double b, double a_r, double b_r, Rng& rng) const {
    const double lambda = hidden_.sample(rng);
    return Draw{outcome_a(a, b_r, lambda), outcome_b(b, a_r, lambda), lambda};
}

// --- singlet model ---------------------------------------------------------

HardyThetas hardy_thetas(double a, double b, double a_r, double b_r) noexcept {
    return HardyThetas{-0.25 * kPi * (1.0 + std::cos(a - b_r)),
                       0.25 * kPi * (1.0 + std::cos(a_r - b))};
}

namespace {
int half_circle_sign(double theta, double lambda) noexcept {
    return wrap_two_pi(lambda - theta) < kPi ? 1 : -1;
}
}  // namespace

int hardy_outcome_a(double a, double b_r, double lambda) noexcept {
    return half_circle_sign(-0.25 * kPi * (1.0 + std::cos(a - b_r)), lambda);
}

int hardy_outcome_b(double b, double a_r, double lambda) noexcept {
    return half_circle_sign(0.25 * kPi * (1.0 + std::cos(a_r - b)), lambda);
}

double hardy_closed_form_e(double a, double b, double a_r, double b_r) noexcept {
    return -0.5 * (std::cos(a - b_r) + std::cos(a_r - b));
}

std::optional<ChProbabilities> HardySingletModel::closed_form_ch(double a, double b,
                                                                 double a_r,
                                                                 double b_r) const {
    return ChProbabilities{0.25 * (1.0 + hardy_closed_form_e(a, b, a_r, b_r)), 0.5, 0.5};
}

// --- quantum reference -----------------------------------------------------

double quantum_e(double a, double b) noexcept { return -std::cos(a - b); }

JointProbabilities quantum_joint_probs(double a, double b) noexcept {
    const double c = std::cos(a - b);
    const double same = 0.25 * (1.0 - c);
    const double diff = 0.25 * (1.0 + c);
    return {same, diff, diff, same};
}

std::pair<int, int> quantum_sample_pair(double a, double b, Rng& rng) noexcept {
    const auto p = quantum_joint_probs(a, b);
    const double u = rng.uniform();
    if (u < p[0]) return {1, 1};
    if (u < p[0] + p[1]) return {1, -1};
    if (u < p[0] + p[1] + p[2]) return {-1, 1};
    return {-1, -1};
}

Draw QuantumSinglet::draw(double a, double b, double, double, Rng& rng) const {
    const auto [x, y] = quantum_sample_pair(a, b, rng);
    return Draw{x, y, std::nullopt};
}

// --- registry --------------------------------------------------------------

std::shared_ptr<const Model> make_model(std::string_view name) {
    if (name == HardySingletModel::kName || name == "hardy") {
        return std::make_shared<HardySingletModel>();
    }
    if (name == QuantumSinglet::kName || name == "quantum") {
        return std::make_shared<QuantumSinglet>();
    }
    throw ConfigError("unknown model '" + std::string(name) + "'");
}

std::vector<std::string> model_names() {
    return {std::string(HardySingletModel::kName), std::string(QuantumSinglet::kName)};
}

}  // namespace rbl
