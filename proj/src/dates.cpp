#include "distinctbo/dates.h"

#include <cstdio>
#include <stdexcept>

namespace distinctbo {

namespace {

int parse_digits(std::string_view s) {
  int value = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad date digit");
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("expected YYYY-MM-DD date, got '" +
                                std::string(text) + "'");
  }
  try {
    const Date d{std::chrono::year{parse_digits(text.substr(0, 4))},
                 std::chrono::month{static_cast<unsigned>(parse_digits(text.substr(5, 2)))},
                 std::chrono::day{static_cast<unsigned>(parse_digits(text.substr(8, 2)))}};
    if (!d.ok()) throw std::invalid_argument("invalid calendar date");
    return d;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("invalid date '" + std::string(text) + "'");
  }
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::vector<Date> business_days(const Date& first, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  std::chrono::sys_days day{first};
  while (out.size() < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
    day += std::chrono::days{1};
  }
  return out;
}

Date nth_weekday(std::chrono::year year, std::chrono::month month,
                 std::chrono::weekday weekday, unsigned n) {
  const Date d{std::chrono::year_month_weekday{year / month / weekday[n]}};
  if (!d.ok()) throw std::invalid_argument("no such weekday in month");
  return d;
}

}  // namespace distinctbo
