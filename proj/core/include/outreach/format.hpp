#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace outreach {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
std::string format_float(float value);

// Fixed-point rendering for human-facing reports.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<float> parse_float(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_upper(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace outreach
