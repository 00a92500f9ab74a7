#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vcit::text {

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double value);

// Whole-token parse; throws Error(InvalidArgument) on junk or trailing text.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string> split_lines(std::string_view text);

bool is_identifier(std::string_view s);

}  // namespace vcit::text
