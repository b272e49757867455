#include "ekma/climatology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

const char* season_name(Season s) {
  switch (s) {
    case Season::kDJF: return "DJF";
    case Season::kMAM: return "MAM";
    case Season::kJJA: return "JJA";
    case Season::kSON: return "SON";
  }
  return "";
}

Season season_of_month(int month) {
  switch (month) {
    case 12: case 1: case 2: return Season::kDJF;
    case 3: case 4: case 5: return Season::kMAM;
    case 6: case 7: case 8: return Season::kJJA;
    case 9: case 10: case 11: return Season::kSON;
    default: throw Error("season_of_month: month " + std::to_string(month) + " out of range");
  }
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile: no values");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

// Sums are accumulated over values sorted ascending so results do not depend on record order.
double ordered_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

CyclePoint summarize(int bin, std::vector<double>& values) {
  CyclePoint p;
  p.bin = bin;
  p.mean = ordered_mean(values);
  p.q25 = quantile_sorted(values, 0.25);
  p.q75 = quantile_sorted(values, 0.75);
  p.n = values.size();
  return p;
}

}  // namespace

std::vector<MonthlyMean> monthly_mean_series(const std::vector<HourlyRecord>& records) {
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (r.o3) groups[{year_of(r.time.date), month_of(r.time.date)}].push_back(*r.o3);
  }
  if (groups.empty()) throw Error("monthly_mean_series: no O3 observations");
  std::vector<MonthlyMean> out;
  for (auto& [key, values] : groups) {
    out.push_back({key.first, key.second, ordered_mean(values), values.size()});
  }
  return out;
}

std::vector<CyclePoint> monthly_climatology(const std::vector<HourlyRecord>& records) {
  std::array<std::vector<double>, 12> by_month;
  for (const auto& r : records) {
    if (r.o3) by_month[static_cast<std::size_t>(month_of(r.time.date) - 1)].push_back(*r.o3);
  }
  std::string empty;
  for (std::size_t m = 0; m < 12; ++m) {
    if (by_month[m].empty()) empty += (empty.empty() ? "" : ", ") + std::to_string(m + 1);
  }
  if (!empty.empty()) throw Error("monthly_climatology: no O3 observations in month(s) " + empty);
  std::vector<CyclePoint> out;
  for (std::size_t m = 0; m < 12; ++m) out.push_back(summarize(static_cast<int>(m + 1), by_month[m]));
  return out;
}

std::map<Season, DiurnalCycle> diurnal_cycle_by_season(const std::vector<HourlyRecord>& records) {
  std::map<Season, std::array<std::vector<double>, 24>> groups;
  for (const auto& r : records) {
    if (r.o3) groups[season_of_month(month_of(r.time.date))][static_cast<std::size_t>(r.time.hour)].push_back(*r.o3);
  }
  std::map<Season, DiurnalCycle> out;
  for (auto& [season, hours] : groups) {
    DiurnalCycle& cycle = out[season];
    for (std::size_t h = 0; h < 24; ++h) {
      if (!hours[h].empty()) cycle[h] = summarize(static_cast<int>(h), hours[h]);
    }
  }
  return out;
}

WeekdayWeekend weekday_weekend_cycle(const std::vector<HourlyRecord>& records) {
  std::array<std::vector<double>, 24> weekday;
  std::array<std::vector<double>, 24> weekend;
  for (const auto& r : records) {
    if (!r.o3) continue;
    auto& bins = is_weekend(r.time.date) ? weekend : weekday;
    bins[static_cast<std::size_t>(r.time.hour)].push_back(*r.o3);
  }
  WeekdayWeekend out;
  for (std::size_t h = 0; h < 24; ++h) {
    if (!weekday[h].empty()) out.weekday[h] = ordered_mean(weekday[h]);
    if (!weekend[h].empty()) out.weekend[h] = ordered_mean(weekend[h]);
  }
  return out;
}

void write_monthly_mean_csv(std::ostream& out, const std::vector<MonthlyMean>& series) {
  out << "year,month,o3_mean_ppm,n\n";
  for (const auto& m : series) {
    out << m.year << ',' << m.month << ',' << csv::format_sig(m.mean) << ',' << m.n << '\n';
  }
}

void write_monthly_climatology_csv(std::ostream& out, const std::vector<CyclePoint>& points) {
  out << "month,o3_mean_ppm,q25_ppm,q75_ppm,n\n";
  for (const auto& p : points) {
    out << p.bin << ',' << csv::format_sig(p.mean) << ',' << csv::format_sig(p.q25) << ','
        << csv::format_sig(p.q75) << ',' << p.n << '\n';
  }
}

void write_diurnal_csv(std::ostream& out, const std::map<Season, DiurnalCycle>& cycles) {
  out << "season,hour,o3_mean_ppm,q25_ppm,q75_ppm,n\n";
  for (const auto& [season, cycle] : cycles) {
    for (const auto& p : cycle) {
      if (!p) continue;
      out << season_name(season) << ',' << p->bin << ',' << csv::format_sig(p->mean) << ','
          << csv::format_sig(p->q25) << ',' << csv::format_sig(p->q75) << ',' << p->n << '\n';
    }
  }
}

void write_weekday_weekend_csv(std::ostream& out, const WeekdayWeekend& cycle) {
  out << "group,hour,o3_mean_ppm\n";
  for (const auto& [name, values] : {std::pair{"weekday", &cycle.weekday}, std::pair{"weekend", &cycle.weekend}}) {
    for (std::size_t h = 0; h < 24; ++h) {
      if ((*values)[h]) out << name << ',' << h << ',' << csv::format_sig(*(*values)[h]) << '\n';
    }
  }
}

}  // namespace ekma
