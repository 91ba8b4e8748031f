#include "rbl/angles.hpp"

#include <cmath>
#include <string>

#include "rbl/errors.hpp"
#include "text.hpp"

namespace rbl {

double wrap_two_pi(double x) noexcept {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative can round up to exactly 2π.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double parse_angle(std::string_view text) {
    auto s = text::trim(text);
    const auto pi_pos = s.find("pi");
    if (pi_pos == std::string_view::npos) return text::to_double(s, "angle");

    double sign = 1.0;
    auto coeff = s.substr(0, pi_pos);
    if (!coeff.empty() && (coeff.front() == '-' || coeff.front() == '+')) {
        sign = coeff.front() == '-' ? -1.0 : 1.0;
        coeff.remove_prefix(1);
    }
    if (!coeff.empty() && coeff.back() == '*') coeff.remove_suffix(1);
    const double numerator = coeff.empty() ? 1.0 : text::to_double(coeff, "angle coefficient");

    auto rest = s.substr(pi_pos + 2);
    double denominator = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') {
            throw InvalidArgumentError("malformed angle '" + std::string(s) + "'");
        }
        denominator = text::to_double(rest.substr(1), "angle denominator");
        if (denominator == 0.0) throw InvalidArgumentError("zero denominator in angle");
    }
    return sign * numerator * kPi / denominator;
}

}  // namespace rbl
