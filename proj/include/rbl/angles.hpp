#pragma once

#include <numbers>
#include <string_view>

namespace rbl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduces x into [0, 2π).
double wrap_two_pi(double x) noexcept;

// Parses "pi/4", "-pi/4", "3pi/4", "3*pi/2", "2pi", "-pi" or a decimal number of radians.
double parse_angle(std::string_view text);

}  // namespace rbl
