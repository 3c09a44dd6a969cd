#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace booqa {

using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", optionally followed by a 'T' or ' ' and a time part,
// which is ignored.
std::optional<Date> parse_iso_date(std::string_view s);

std::string format_date(Date d);

inline long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace booqa
