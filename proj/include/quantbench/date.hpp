#pragma once

#include <compare>
#include <cstdio>
#include <string>

#include "quantbench/errors.hpp"

namespace quantbench {

// Calendar date with ISO-8601 (YYYY-MM-DD) text form.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

  static int days_in_month(int y, int m) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[m - 1];
  }

  bool valid() const {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
  }

  static Date parse(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
      throw DataError("bad date '" + text + "' (expected YYYY-MM-DD)");
    }
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
      if (text[i] < '0' || text[i] > '9') {
        throw DataError("bad date '" + text + "' (expected YYYY-MM-DD)");
      }
    }
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (!d.valid()) throw DataError("bad date '" + text + "' (no such calendar day)");
    return d;
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

}  // namespace quantbench
