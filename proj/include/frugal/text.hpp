#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace frugal {

// Shortest decimal string that round-trips the value. Locale independent,
// so emitted CSV/JSON bytes are stable across runs.
std::string fmt_double(double value);

// Fixed number of significant digits (general format); used for SVG
// coordinates where byte stability matters more than full precision.
std::string fmt_double(double value, int significant_digits);

std::string_view trim(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

// Strict: the whole token must be consumed. Returns false on failure.
bool parse_double(std::string_view token, double& out);

std::string xml_escape(std::string_view text);

}  // namespace frugal
