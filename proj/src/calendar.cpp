#include "ekma/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace ekma {

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    return std::nullopt;
  }
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const char* base = text.data();
  if (std::from_chars(base, base + 4, y).ptr != base + 4 ||
      std::from_chars(base + 5, base + 7, m).ptr != base + 7 ||
      std::from_chars(base + 8, base + 10, d).ptr != base + 10) {
    return std::nullopt;
  }
  const Date date = make_date(y, m, d);
  if (!date.ok()) {
    return std::nullopt;
  }
  return date;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year_of(d), month_of(d), day_of(d));
  return buf;
}

}  // namespace ekma
