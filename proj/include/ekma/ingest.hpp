#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ekma/calendar.hpp"

namespace ekma {

// AQS parameter codes for the four pollutants the pipeline uses.
enum class Pollutant : int {
  kO3 = 44201,
  kNO2 = 42602,
  kCO = 42101,
  kPM25 = 88101,
};

inline constexpr Pollutant kAllPollutants[] = {Pollutant::kO3, Pollutant::kNO2, Pollutant::kCO,
                                               Pollutant::kPM25};

std::optional<Pollutant> pollutant_from_code(long code);
// Units string AirData uses for the pollutant's native unit.
const char* expected_units(Pollutant p);

struct RawObservation {
  std::string site_key;  // "SS-CCC-NNNN"
  Pollutant parameter = Pollutant::kO3;
  int poc = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  Date date_local;
  int hour_local = 0;
  double value = 0.0;
  std::string units;
  std::string qualifier;

  friend bool operator==(const RawObservation&, const RawObservation&) = default;
};

// One site-hour in wide form. Concentrations are in native units:
// O3 and CO in ppm, NO2 in ppb, PM2.5 in ug/m3.
struct HourlyRecord {
  std::string site_key;
  double latitude = 0.0;
  double longitude = 0.0;
  Timestamp time;
  std::optional<double> o3;
  std::optional<double> no2;
  std::optional<double> co;
  std::optional<double> pm25;

  friend bool operator==(const HourlyRecord&, const HourlyRecord&) = default;
};

// Which sites to keep while parsing. A non-empty allowlist wins over the
// state/county pair; an empty state or county matches anything.
struct SiteFilter {
  std::string state = "06";
  std::string county = "037";
  std::vector<std::string> allowlist;

  static SiteFilter any() { return SiteFilter{"", "", {}}; }
  bool accepts(const std::string& site_key) const;
};

struct ParseResult {
  std::vector<RawObservation> observations;
  std::size_t skipped = 0;  // rows with unparseable fields
};

// Reads an AirData hourly CSV. Throws FormatError on an empty stream or a
// missing required header column.
ParseResult parse_hourly_csv(std::istream& in, Pollutant parameter,
                             const SiteFilter& filter = SiteFilter::any());

// Drops negative values, flagged rows and rows with unexpected units, then
// keeps only the lowest POC per (site, parameter, date, hour).
std::vector<RawObservation> apply_qc(const std::vector<RawObservation>& obs);

// Joins QC'd observations into one record per (site, date, hour), sorted by
// that key. Coordinate conflicts above 1e-4 degrees are appended to
// `warnings` when given.
std::vector<HourlyRecord> pivot_records(const std::vector<RawObservation>& obs,
                                        std::vector<std::string>* warnings = nullptr);

// Keeps records of sites whose O3 coverage within `span` is at least
// `min_fraction` of the span's hours.
std::vector<HourlyRecord> filter_coverage(const std::vector<HourlyRecord>& records, double min_fraction,
                                          const DateRange& span);

inline constexpr const char* kRecordsHeader = "site_key,latitude,longitude,date_local,hour_local,o3,no2,co,pm25";

void write_records_csv(std::ostream& out, const std::vector<HourlyRecord>& records);
std::vector<HourlyRecord> read_records_csv(std::istream& in);

}  // namespace ekma
