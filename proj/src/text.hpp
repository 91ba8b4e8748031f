#pragma once

// Small parsing helpers shared by the CSV and config readers.

#include <string>
#include <string_view>
#include <vector>

namespace rbl::text {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

// Whole-string numeric parses; throw InvalidArgumentError naming `what`.
double to_double(std::string_view s, std::string_view what);
long long to_int(std::string_view s, std::string_view what);

// Shortest decimal that round-trips exactly.
std::string exact(double x);
// Fixed 6-decimal rendering for human-facing output.
std::string fixed6(double x);

}  // namespace rbl::text
