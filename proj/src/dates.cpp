#include "tailcast/dates.hpp"

#include <charconv>
#include <cstdio>

#include "tailcast/error.hpp"

namespace tailcast {

namespace {

int parse_field(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidInput("invalid date '" + std::string(whole) + "' (expected YYYY-MM-DD)");
  }
  return value;
}

}  // namespace

std::chrono::sys_days parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InvalidInput("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{parse_field(text.substr(0, 4), text)},
                                        std::chrono::month{static_cast<unsigned>(parse_field(text.substr(5, 2), text))},
                                        std::chrono::day{static_cast<unsigned>(parse_field(text.substr(8, 2), text))}};
  if (!ymd.ok()) throw InvalidInput("invalid calendar date '" + std::string(text) + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace tailcast
