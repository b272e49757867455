#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekma/ingest.hpp"

namespace ekma {

struct MonthlyMean {
  int year = 0;
  int month = 0;
  double mean = 0.0;
  std::size_t n = 0;
};

struct CyclePoint {
  int bin = 0;  // month 1-12 or hour 0-23
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t n = 0;
};

enum class Season { kDJF, kMAM, kJJA, kSON };
const char* season_name(Season s);
Season season_of_month(int month);

// Hourly cells with no observations are nullopt.
using DiurnalCycle = std::array<std::optional<CyclePoint>, 24>;

struct WeekdayWeekend {
  std::array<std::optional<double>, 24> weekday;
  std::array<std::optional<double>, 24> weekend;
};

// Linear-interpolation quantile of sorted values: h = (n-1)q,
// v[floor h] + (h - floor h)(v[ceil h] - v[floor h]).
double quantile_sorted(std::span<const double> sorted, double q);

std::vector<MonthlyMean> monthly_mean_series(const std::vector<HourlyRecord>& records);
std::vector<CyclePoint> monthly_climatology(const std::vector<HourlyRecord>& records);
std::map<Season, DiurnalCycle> diurnal_cycle_by_season(const std::vector<HourlyRecord>& records);
WeekdayWeekend weekday_weekend_cycle(const std::vector<HourlyRecord>& records);

void write_monthly_mean_csv(std::ostream& out, const std::vector<MonthlyMean>& series);
void write_monthly_climatology_csv(std::ostream& out, const std::vector<CyclePoint>& points);
void write_diurnal_csv(std::ostream& out, const std::map<Season, DiurnalCycle>& cycles);
void write_weekday_weekend_csv(std::ostream& out, const WeekdayWeekend& cycle);

}  // namespace ekma
