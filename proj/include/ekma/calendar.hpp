#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ekma {

using Date = std::chrono::year_month_day;

// Local calendar date plus hour of day.
struct Timestamp {
  Date date;
  int hour = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline int year_of(const Date& d) { return static_cast<int>(d.year()); }
inline int month_of(const Date& d) { return static_cast<int>(static_cast<unsigned>(d.month())); }
inline int day_of(const Date& d) { return static_cast<int>(static_cast<unsigned>(d.day())); }

// Monday = 0 ... Sunday = 6.
inline int day_of_week(const Date& d) {
  return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{d}}.iso_encoding()) - 1;
}

inline bool is_weekend(const Date& d) { return day_of_week(d) >= 5; }

inline long days_between(const Date& first, const Date& last) {
  return (std::chrono::sys_days{last} - std::chrono::sys_days{first}).count();
}

inline Date add_days(const Date& d, long n) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{n}};
}

// Accepts exactly "YYYY-MM-DD".
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& d);

// Inclusive range of calendar dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(const Date& d) const { return first <= d && d <= last; }
  long hours() const { return (days_between(first, last) + 1) * 24; }
};

}  // namespace ekma
