#include "ekma/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

std::optional<Pollutant> pollutant_from_code(long code) {
  for (const Pollutant p : kAllPollutants) {
    if (static_cast<long>(p) == code) {
      return p;
    }
  }
  return std::nullopt;
}

const char* expected_units(Pollutant p) {
  switch (p) {
    case Pollutant::kO3:
    case Pollutant::kCO:
      return "Parts per million";
    case Pollutant::kNO2:
      return "Parts per billion";
    case Pollutant::kPM25:
      return "Micrograms/cubic meter (LC)";
  }
  return "";
}

bool SiteFilter::accepts(const std::string& site_key) const {
  if (!allowlist.empty()) {
    return std::find(allowlist.begin(), allowlist.end(), site_key) != allowlist.end();
  }
  if (!state.empty() && site_key.compare(0, 3, state + "-") != 0) {
    return false;
  }
  if (!county.empty() && site_key.compare(3, county.size() + 1, county + "-") != 0) {
    return false;
  }
  return true;
}

namespace {

constexpr std::array<const char*, 12> kRequiredColumns = {
    "State Code", "County Code", "Site Num",          "Parameter Code",   "POC",      "Latitude",
    "Longitude",  "Date Local",  "Time Local", "Sample Measurement", "Units of Measure", "Qualifier"};

enum Col { kState, kCounty, kSite, kParam, kPoc, kLat, kLon, kDate, kTime, kValue, kUnits, kQualifier };

std::string zero_pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) {
    return s;
  }
  return std::string(width - s.size(), '0') + s;
}

std::optional<int> parse_hour(const std::string& text) {
  // "HH:MM"; minutes must be zero for hourly data.
  if (text.size() != 5 || text[2] != ':') {
    return std::nullopt;
  }
  const auto h = csv::parse_long(std::string_view(text).substr(0, 2));
  const auto m = csv::parse_long(std::string_view(text).substr(3, 2));
  if (!h || !m || *h < 0 || *h > 23 || *m != 0) {
    return std::nullopt;
  }
  return static_cast<int>(*h);
}

}  // namespace

ParseResult parse_hourly_csv(std::istream& in, Pollutant parameter, const SiteFilter& filter) {
  std::string line;
  if (!csv::next_line(in, line)) {
    throw FormatError("hourly csv: empty file");
  }
  const auto header = csv::split_line(line);
  std::array<std::size_t, kRequiredColumns.size()> idx{};
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) {
    const auto found = csv::find_column(header, kRequiredColumns[c]);
    if (!found) {
      throw FormatError(std::string("hourly csv: missing required column \"") + kRequiredColumns[c] + "\"");
    }
    idx[c] = *found;
  }
  const std::size_t min_fields = *std::max_element(idx.begin(), idx.end()) + 1;

  ParseResult result;
  while (csv::next_line(in, line)) {
    const auto f = csv::split_line(line);
    if (f.size() < min_fields) {
      ++result.skipped;
      continue;
    }
    const auto code = csv::parse_long(f[idx[kParam]]);
    if (!code) {
      ++result.skipped;
      continue;
    }
    if (*code != static_cast<long>(parameter)) {
      continue;
    }
    const std::string site_key =
        zero_pad(f[idx[kState]], 2) + "-" + zero_pad(f[idx[kCounty]], 3) + "-" + zero_pad(f[idx[kSite]], 4);
    if (!filter.accepts(site_key)) {
      continue;
    }
    const auto poc = csv::parse_long(f[idx[kPoc]]);
    const auto lat = csv::parse_double(f[idx[kLat]]);
    const auto lon = csv::parse_double(f[idx[kLon]]);
    const auto date = parse_iso_date(f[idx[kDate]]);
    const auto hour = parse_hour(f[idx[kTime]]);
    const auto value = csv::parse_double(f[idx[kValue]]);
    if (!poc || !lat || !lon || !date || !hour || !value || std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0) {
      ++result.skipped;
      continue;
    }
    RawObservation obs;
    obs.site_key = site_key;
    obs.parameter = parameter;
    obs.poc = static_cast<int>(*poc);
    obs.latitude = *lat;
    obs.longitude = *lon;
    obs.date_local = *date;
    obs.hour_local = *hour;
    obs.value = *value;
    obs.units = f[idx[kUnits]];
    obs.qualifier = f[idx[kQualifier]];
    result.observations.push_back(std::move(obs));
  }
  return result;
}

std::vector<RawObservation> apply_qc(const std::vector<RawObservation>& obs) {
  using Key = std::tuple<std::string, int, Date, int>;
  auto key_of = [](const RawObservation& o) {
    return Key{o.site_key, static_cast<int>(o.parameter), o.date_local, o.hour_local};
  };
  auto valid = [](const RawObservation& o) {
    return o.value >= 0.0 && o.qualifier.empty() && o.units == expected_units(o.parameter);
  };

  std::map<Key, int> lowest_poc;
  for (const auto& o : obs) {
    if (!valid(o)) continue;
    auto [it, inserted] = lowest_poc.emplace(key_of(o), o.poc);
    if (!inserted) it->second = std::min(it->second, o.poc);
  }

  std::vector<RawObservation> kept;
  std::set<Key> emitted;
  for (const auto& o : obs) {
    if (!valid(o)) continue;
    const Key key = key_of(o);
    if (lowest_poc.at(key) != o.poc || !emitted.insert(key).second) continue;
    kept.push_back(o);
  }
  return kept;
}

std::vector<HourlyRecord> pivot_records(const std::vector<RawObservation>& obs, std::vector<std::string>* warnings) {
  using Key = std::tuple<std::string, Date, int>;
  struct Group {
    HourlyRecord record;
    bool have_coords = false;
    bool coords_from_o3 = false;
  };
  std::map<Key, Group> groups;

  for (const auto& o : obs) {
    auto& g = groups[Key{o.site_key, o.date_local, o.hour_local}];
    HourlyRecord& r = g.record;
    r.site_key = o.site_key;
    r.time = Timestamp{o.date_local, o.hour_local};

    const bool is_o3 = o.parameter == Pollutant::kO3;
    const bool conflict = g.have_coords && (std::abs(r.latitude - o.latitude) > 1e-4 ||
                                            std::abs(r.longitude - o.longitude) > 1e-4);
    if (conflict && warnings) {
      warnings->push_back("conflicting coordinates at " + o.site_key + " " + format_iso_date(o.date_local) +
                          " hour " + std::to_string(o.hour_local));
    }
    // O3 coordinates take precedence; otherwise the first member's stand.
    if (!g.have_coords || (is_o3 && !g.coords_from_o3)) {
      r.latitude = o.latitude;
      r.longitude = o.longitude;
      g.have_coords = true;
      g.coords_from_o3 = is_o3;
    }

    switch (o.parameter) {
      case Pollutant::kO3: r.o3 = o.value; break;
      case Pollutant::kNO2: r.no2 = o.value; break;
      case Pollutant::kCO: r.co = o.value; break;
      case Pollutant::kPM25: r.pm25 = o.value; break;
    }
  }

  std::vector<HourlyRecord> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    out.push_back(std::move(g.record));
  }
  return out;
}

std::vector<HourlyRecord> filter_coverage(const std::vector<HourlyRecord>& records, double min_fraction,
                                          const DateRange& span) {
  if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
    throw Error("filter_coverage: min_fraction must lie in (0, 1]");
  }
  if (span.last < span.first) {
    throw Error("filter_coverage: empty span");
  }
  std::unordered_map<std::string, std::set<Timestamp>> covered;
  for (const auto& r : records) {
    if (r.o3 && span.contains(r.time.date)) {
      covered[r.site_key].insert(r.time);
    }
  }
  const double needed = min_fraction * static_cast<double>(span.hours());
  std::vector<HourlyRecord> out;
  for (const auto& r : records) {
    const auto it = covered.find(r.site_key);
    if (it != covered.end() && static_cast<double>(it->second.size()) >= needed) {
      out.push_back(r);
    }
  }
  return out;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? csv::format_exact(*v) : std::string(); }

std::optional<double> read_opt(const std::string& field, std::size_t line_no) {
  if (field.empty()) {
    return std::nullopt;
  }
  const auto v = csv::parse_double(field);
  if (!v) {
    throw FormatError("records csv line " + std::to_string(line_no) + ": bad number \"" + field + "\"");
  }
  return v;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<HourlyRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << csv::escape(r.site_key) << ',' << csv::format_exact(r.latitude) << ',' << csv::format_exact(r.longitude)
        << ',' << format_iso_date(r.time.date) << ',' << r.time.hour << ',' << opt_field(r.o3) << ','
        << opt_field(r.no2) << ',' << opt_field(r.co) << ',' << opt_field(r.pm25) << '\n';
  }
}

std::vector<HourlyRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) {
    throw FormatError("records csv: empty file");
  }
  if (line != kRecordsHeader) {
    throw FormatError("records csv: unexpected header \"" + line + "\"");
  }
  std::vector<HourlyRecord> records;
  std::size_t line_no = 1;
  while (csv::next_line(in, line)) {
    ++line_no;
    const auto f = csv::split_line(line);
    if (f.size() != 9) {
      throw FormatError("records csv line " + std::to_string(line_no) + ": expected 9 fields");
    }
    HourlyRecord r;
    r.site_key = f[0];
    const auto lat = csv::parse_double(f[1]);
    const auto lon = csv::parse_double(f[2]);
    const auto date = parse_iso_date(f[3]);
    const auto hour = csv::parse_long(f[4]);
    if (!lat || !lon || !date || !hour || *hour < 0 || *hour > 23) {
      throw FormatError("records csv line " + std::to_string(line_no) + ": bad key fields");
    }
    r.latitude = *lat;
    r.longitude = *lon;
    r.time = Timestamp{*date, static_cast<int>(*hour)};
    r.o3 = read_opt(f[5], line_no);
    r.no2 = read_opt(f[6], line_no);
    r.co = read_opt(f[7], line_no);
    r.pm25 = read_opt(f[8], line_no);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace ekma
