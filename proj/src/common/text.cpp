#include "communitypoll/common/text.hpp"

#include <cctype>
#include <cfenv>
#include <cmath>
#include <cstdio>

namespace communitypoll {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

namespace {

std::string add_thousands_separators(std::string digits) {
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  return std::string(out.rbegin(), out.rend());
}

}  // namespace

std::string format_number(double value, int max_decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", max_decimals, value);
  std::string s(buf);
  bool negative = !s.empty() && s[0] == '-';
  if (negative) s.erase(0, 1);
  std::string integer = s;
  std::string fraction;
  if (auto dot = s.find('.'); dot != std::string::npos) {
    integer = s.substr(0, dot);
    fraction = s.substr(dot + 1);
    while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  }
  std::string out = add_thousands_separators(integer);
  if (!fraction.empty()) out += "." + fraction;
  if (negative) out.insert(0, "-");
  return out;
}

std::string format_count(long long value) {
  bool negative = value < 0;
  std::string digits = std::to_string(negative ? -value : value);
  std::string out = add_thousands_separators(digits);
  if (negative) out.insert(0, "-");
  return out;
}

double round1(double value) {
  // nearbyint honours the default round-to-nearest-even mode.
  return std::nearbyint(value * 10.0) / 10.0;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round1(value));
  return std::string(buf);
}

}  // namespace communitypoll
