#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "ekma/error.hpp"
#include "ekma/ingest.hpp"
#include "helpers.hpp"

using namespace ekma;

namespace {

const char* kHeader =
    "\"State Code\",\"County Code\",\"Site Num\",\"Parameter Code\",\"POC\",\"Latitude\",\"Longitude\",\"Datum\","
    "\"Parameter Name\",\"Date Local\",\"Time Local\",\"Date GMT\",\"Time GMT\",\"Sample Measurement\","
    "\"Units of Measure\",\"MDL\",\"Uncertainty\",\"Qualifier\",\"Method Type\"\n";

std::string row(const std::string& site, int code, int poc, const std::string& date, const std::string& time,
                const std::string& value, const std::string& units = "Parts per million",
                const std::string& qualifier = "", const std::string& state = "06", const std::string& county = "037") {
  std::ostringstream s;
  s << '"' << state << "\",\"" << county << "\",\"" << site << "\",\"" << code << "\"," << poc
    << ",34.066429,-118.226755,\"WGS84\",\"Ozone\",\"" << date << "\",\"" << time << "\",\"" << date << "\",\"" << time
    << "\"," << value << ",\"" << units << "\",0.005,,\"" << qualifier << "\",\"FEM\"\n";
  return s.str();
}

RawObservation obs(const std::string& site, Pollutant p, int poc, int hour, double value,
                   const std::string& qualifier = "") {
  RawObservation o;
  o.site_key = site;
  o.parameter = p;
  o.poc = poc;
  o.latitude = 34.0;
  o.longitude = -118.0;
  o.date_local = make_date(2024, 7, 1);
  o.hour_local = hour;
  o.value = value;
  o.units = expected_units(p);
  o.qualifier = qualifier;
  return o;
}

}  // namespace

TEST_CASE("parse: field mapping") {
  std::istringstream in(std::string(kHeader) + row("0002", 44201, 1, "2024-07-15", "13:00", "0.041"));
  const auto res = parse_hourly_csv(in, Pollutant::kO3);
  REQUIRE(res.observations.size() == 1);
  const auto& o = res.observations[0];
  CHECK(o.site_key == "06-037-0002");
  CHECK(o.hour_local == 13);
  CHECK(o.value == 0.041);
  CHECK(o.poc == 1);
  CHECK(o.date_local == make_date(2024, 7, 15));
  CHECK(o.units == "Parts per million");
  CHECK(o.qualifier.empty());
  CHECK(res.skipped == 0);
}

TEST_CASE("parse: unparseable rows are skipped and counted") {
  std::string text = kHeader;
  text += row("0002", 44201, 1, "2024-07-15", "13:00", "0.041");
  text += row("0002", 44201, 1, "2024-07-15", "14:00", "NA");
  text += row("0002", 44201, 1, "2024-07-15", "15:00", "0.043");
  text += row("0002", 44201, 1, "2024-07-15", "16:00", "0.040");
  std::istringstream in(text);
  const auto res = parse_hourly_csv(in, Pollutant::kO3);
  CHECK(res.observations.size() == 3);
  CHECK(res.skipped == 1);
}

TEST_CASE("parse: other parameter codes are ignored, not counted") {
  std::string text = kHeader;
  text += row("0002", 44201, 1, "2024-07-15", "13:00", "0.041");
  text += row("0002", 42602, 1, "2024-07-15", "13:00", "12.0", "Parts per billion");
  std::istringstream in(text);
  const auto res = parse_hourly_csv(in, Pollutant::kO3);
  CHECK(res.observations.size() == 1);
  CHECK(res.skipped == 0);
}

TEST_CASE("parse: site filter") {
  std::string text = kHeader;
  text += row("0002", 44201, 1, "2024-07-15", "13:00", "0.041");
  text += row("0005", 44201, 1, "2024-07-15", "13:00", "0.041", "Parts per million", "", "06", "059");
  {
    std::istringstream in(text);
    CHECK(parse_hourly_csv(in, Pollutant::kO3, SiteFilter{}).observations.size() == 1);
  }
  {
    std::istringstream in(text);
    CHECK(parse_hourly_csv(in, Pollutant::kO3, SiteFilter::any()).observations.size() == 2);
  }
  {
    SiteFilter only{"", "", {"06-059-0005"}};
    std::istringstream in(text);
    const auto res = parse_hourly_csv(in, Pollutant::kO3, only);
    REQUIRE(res.observations.size() == 1);
    CHECK(res.observations[0].site_key == "06-059-0005");
  }
}

TEST_CASE("parse: missing header column names the column") {
  std::string header = kHeader;
  header.replace(header.find("\"Sample Measurement\","), 21, "");
  std::istringstream in(header);
  try {
    parse_hourly_csv(in, Pollutant::kO3);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("Sample Measurement") != std::string::npos);
  }
}

TEST_CASE("parse: empty file is fatal") {
  std::istringstream in("");
  CHECK_THROWS_AS(parse_hourly_csv(in, Pollutant::kO3), FormatError);
}

TEST_CASE("qc: drops negatives, flagged rows and wrong units") {
  std::vector<RawObservation> v = {obs("a", Pollutant::kO3, 1, 0, -0.002), obs("a", Pollutant::kO3, 1, 1, 0.03, "V"),
                                   obs("a", Pollutant::kO3, 1, 2, 0.03), obs("a", Pollutant::kNO2, 1, 2, 10.0)};
  v[3].units = "Parts per million";  // NO2 must be ppb
  const auto out = apply_qc(v);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == v[2]);  // kept unchanged
}

TEST_CASE("qc: lowest POC wins, order otherwise preserved") {
  std::vector<RawObservation> v = {obs("a", Pollutant::kO3, 2, 5, 0.05), obs("b", Pollutant::kO3, 1, 5, 0.02),
                                   obs("a", Pollutant::kO3, 1, 5, 0.04), obs("a", Pollutant::kNO2, 3, 5, 9.0)};
  const auto out = apply_qc(v);
  REQUIRE(out.size() == 3);
  CHECK(out[0].site_key == "b");
  CHECK(out[1].poc == 1);
  CHECK(out[1].value == 0.04);
  CHECK(out[2].parameter == Pollutant::kNO2);
  for (const auto& o : out) {
    CHECK(o.value >= 0);
    CHECK(o.qualifier.empty());
  }
}

TEST_CASE("pivot: partial fill, single pollutant, distinct hours") {
  const auto a = pivot_records({obs("s", Pollutant::kO3, 1, 5, 0.03), obs("s", Pollutant::kNO2, 1, 5, 20.0)});
  REQUIRE(a.size() == 1);
  CHECK(a[0].o3 == 0.03);
  CHECK(a[0].no2 == 20.0);
  CHECK_FALSE(a[0].co.has_value());
  CHECK_FALSE(a[0].pm25.has_value());

  const auto b = pivot_records({obs("s", Pollutant::kO3, 1, 5, 0.03)});
  REQUIRE(b.size() == 1);
  CHECK(b[0].o3.has_value());
  CHECK_FALSE(b[0].no2.has_value());

  const auto c = pivot_records({obs("s", Pollutant::kO3, 1, 5, 0.03), obs("s", Pollutant::kO3, 1, 6, 0.04)});
  CHECK(c.size() == 2);
}

TEST_CASE("pivot: coordinates come from O3, conflicts warn") {
  auto no2 = obs("s", Pollutant::kNO2, 1, 5, 20.0);
  no2.latitude = 34.5;
  auto o3 = obs("s", Pollutant::kO3, 1, 5, 0.03);
  std::vector<std::string> warnings;
  const auto out = pivot_records({no2, o3}, &warnings);
  REQUIRE(out.size() == 1);
  CHECK(out[0].latitude == 34.0);
  CHECK(warnings.size() == 1);

  auto close = obs("s", Pollutant::kNO2, 1, 5, 20.0);
  close.latitude = 34.00005;
  warnings.clear();
  pivot_records({close, o3}, &warnings);
  CHECK(warnings.empty());
}

TEST_CASE("pivot: keys are unique and sorted") {
  std::vector<RawObservation> v;
  for (int h : {7, 3, 3, 9}) v.push_back(obs("b", Pollutant::kO3, 1, h, 0.01));
  for (int h : {3, 4}) v.push_back(obs("a", Pollutant::kCO, 1, h, 0.3));
  v[2].parameter = Pollutant::kPM25;
  v[2].units = expected_units(Pollutant::kPM25);
  const auto out = pivot_records(v);
  std::set<std::pair<std::string, Timestamp>> keys;
  for (const auto& r : out) keys.insert({r.site_key, r.time});
  CHECK(keys.size() == out.size());
  CHECK(std::is_sorted(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.site_key, x.time) < std::tie(y.site_key, y.time);
  }));
}

TEST_CASE("coverage: brute-force count over a 100-hour span") {
  // 100 hours = days 1..4 plus 4 hours; use a 5-day span and count only its first 100 hours by construction.
  const DateRange span{make_date(2024, 1, 1), make_date(2024, 1, 5)};  // 120 hours
  std::vector<HourlyRecord> records;
  const double want[3] = {0.9, 0.8, 0.1};
  for (int s = 0; s < 3; ++s) {
    const int present = static_cast<int>(want[s] * 120);
    for (int i = 0; i < 120; ++i) {
      const auto d = add_days(span.first, i / 24);
      auto r = testing::record("06-037-000" + std::to_string(s), year_of(d), month_of(d), day_of(d), i % 24,
                               i < present ? std::optional<double>(0.03) : std::nullopt, 10.0);
      records.push_back(r);
    }
  }
  const auto kept = filter_coverage(records, 0.75, span);
  std::set<std::string> sites;
  for (const auto& r : kept) sites.insert(r.site_key);
  CHECK(sites == std::set<std::string>{"06-037-0000", "06-037-0001"});

  // Direct count of O3 hours per retained site agrees with the rule.
  for (const auto& site : sites) {
    const auto n = std::count_if(records.begin(), records.end(),
                                 [&](const auto& r) { return r.site_key == site && r.o3.has_value(); });
    CHECK(static_cast<double>(n) >= 0.75 * span.hours());
  }
  // Membership only: retained records are untouched.
  for (const auto& r : kept) {
    CHECK(std::find(records.begin(), records.end(), r) != records.end());
  }
}

TEST_CASE("coverage: full and half coverage") {
  const DateRange span{make_date(2024, 1, 1), make_date(2024, 1, 1)};
  std::vector<HourlyRecord> full, half;
  for (int h = 0; h < 24; ++h) {
    full.push_back(testing::record("f", 2024, 1, 1, h, 0.02));
    half.push_back(testing::record("h", 2024, 1, 1, h, h % 2 ? std::optional<double>(0.02) : std::nullopt));
  }
  CHECK(filter_coverage(full, 0.75, span).size() == 24);
  CHECK(filter_coverage(half, 0.75, span).empty());
  CHECK(filter_coverage(half, 0.5, span).size() == 24);
}

TEST_CASE("coverage: hours outside the span do not count") {
  const DateRange span{make_date(2024, 1, 1), make_date(2024, 1, 1)};
  std::vector<HourlyRecord> v;
  for (int h = 0; h < 24; ++h) v.push_back(testing::record("x", 2024, 1, 2, h, 0.02));
  CHECK(filter_coverage(v, 0.75, span).empty());
}

TEST_CASE("records csv round trip") {
  std::vector<HourlyRecord> v = {testing::record("06-037-0002", 2024, 7, 15, 13, 0.041, 12.5, std::nullopt, 8.25),
                                 testing::record("06-037-0002", 2024, 7, 15, 14, std::nullopt, 1.0 / 3.0, 0.4)};
  std::ostringstream out;
  write_records_csv(out, v);
  CHECK(out.str().rfind(std::string(kRecordsHeader) + "\n", 0) == 0);
  CHECK(out.str().find("2024-07-15,13,0.041,12.5,,8.25") != std::string::npos);
  std::istringstream in(out.str());
  CHECK(read_records_csv(in) == v);
}

TEST_CASE("parse -> qc -> pivot is deterministic") {
  std::string text = kHeader;
  for (int h = 0; h < 24; ++h) {
    text += row("0002", 44201, 1 + h % 2, "2024-07-15", (h < 10 ? "0" : "") + std::to_string(h) + ":00",
                std::to_string(0.001 * h));
  }
  auto run = [&] {
    std::istringstream in(text);
    return pivot_records(apply_qc(parse_hourly_csv(in, Pollutant::kO3).observations));
  };
  CHECK(run() == run());
  CHECK(run().size() == 24);
}
