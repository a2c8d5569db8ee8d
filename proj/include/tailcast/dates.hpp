#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace tailcast {

/// Strict YYYY-MM-DD; throws InvalidInput on anything else.
[[nodiscard]] std::chrono::sys_days parse_iso_date(std::string_view text);
[[nodiscard]] std::string format_iso_date(std::chrono::sys_days day);

}  // namespace tailcast
