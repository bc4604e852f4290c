#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace distinctbo {

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date, `YYYY-MM-DD`. Throws std::invalid_argument.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

// Monday through Friday trading calendar without holidays.
std::vector<Date> business_days(const Date& first, std::size_t count);

// The n-th (1-based) given weekday of a month, e.g. the second Wednesday.
Date nth_weekday(std::chrono::year year, std::chrono::month month,
                 std::chrono::weekday weekday, unsigned n);

}  // namespace distinctbo
