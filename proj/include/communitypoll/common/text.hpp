#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace communitypoll {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
void replace_all(std::string& s, std::string_view from, std::string_view to);

// "1234567.8912" -> "1,234,567.891" (at most max_decimals digits, trailing
// zeros trimmed, never scientific notation).
std::string format_number(double value, int max_decimals = 3);
std::string format_count(long long value);

// One decimal place, ties to even.
double round1(double value);
std::string format_percent(double value);

}  // namespace communitypoll
