#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ekma/climatology.hpp"
#include "ekma/error.hpp"
#include "helpers.hpp"

using namespace ekma;
using testing::record;

namespace {

// One record per day of every month of 2024 at the given hour.
std::vector<HourlyRecord> full_year(int hour, double value) {
  std::vector<HourlyRecord> v;
  for (unsigned m = 1; m <= 12; ++m) v.push_back(record("s", 2024, m, 10, hour, value + m * 0.001));
  return v;
}

}  // namespace

TEST_CASE("quantile: linear interpolation") {
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.25) == 1.75);
  CHECK(quantile_sorted(v, 0.75) == 3.25);
  CHECK(quantile_sorted(v, 0.0) == 1);
  CHECK(quantile_sorted(v, 1.0) == 4);
  const std::vector<double> one = {7};
  CHECK(quantile_sorted(one, 0.25) == 7);
}

TEST_CASE("monthly mean series") {
  auto s = monthly_mean_series({record("s", 2024, 7, 1, 0, 0.04)});
  REQUIRE(s.size() == 1);
  CHECK(s[0].year == 2024);
  CHECK(s[0].month == 7);
  CHECK(s[0].mean == 0.04);
  CHECK(s[0].n == 1);

  s = monthly_mean_series({record("s", 2024, 7, 1, 0, 0.02), record("s", 2024, 7, 2, 0, 0.06)});
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean == doctest::Approx(0.04).epsilon(1e-15));

  s = monthly_mean_series({record("s", 2025, 1, 1, 0, 0.02), record("s", 2024, 7, 2, 0, 0.06),
                           record("s", 2024, 8, 2, 0, std::nullopt)});
  REQUIRE(s.size() == 2);
  CHECK(s[0].year == 2024);
  CHECK(s[1].year == 2025);

  CHECK_THROWS_AS(monthly_mean_series({record("s", 2024, 8, 2, 0, std::nullopt)}), Error);
}

TEST_CASE("monthly climatology: quantiles, single and constant months") {
  auto v = full_year(12, 0.02);
  for (double x : {1.0, 2.0, 3.0, 4.0}) v.push_back(record("s", 2025, 3, 1, static_cast<int>(x), x));
  v.erase(std::remove_if(v.begin(), v.end(), [](const auto& r) { return month_of(r.time.date) == 3 && year_of(r.time.date) == 2024; }),
          v.end());
  const auto c = monthly_climatology(v);
  REQUIRE(c.size() == 12);
  CHECK(c[2].bin == 3);
  CHECK(c[2].q25 == 1.75);
  CHECK(c[2].q75 == 3.25);
  CHECK(c[2].mean == 2.5);
  CHECK(c[2].n == 4);
  CHECK(c[0].mean == c[0].q25);
  CHECK(c[0].q25 == c[0].q75);
}

TEST_CASE("monthly climatology: empty month is fatal and named") {
  auto v = full_year(12, 0.02);
  v.erase(v.begin() + 4);  // May
  try {
    monthly_climatology(v);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
}

TEST_CASE("seasons") {
  CHECK(season_of_month(12) == Season::kDJF);
  CHECK(season_of_month(1) == Season::kDJF);
  CHECK(season_of_month(4) == Season::kMAM);
  CHECK(season_of_month(7) == Season::kJJA);
  CHECK(season_of_month(11) == Season::kSON);
  CHECK(std::string(season_name(Season::kJJA)) == "JJA");
}

TEST_CASE("diurnal by season") {
  auto d = diurnal_cycle_by_season({record("s", 2024, 7, 1, 14, 0.05)});
  REQUIRE(d.size() == 1);
  REQUIRE(d.count(Season::kJJA) == 1);
  REQUIRE(d[Season::kJJA][14].has_value());
  CHECK(d[Season::kJJA][14]->mean == 0.05);
  CHECK_FALSE(d[Season::kJJA][13].has_value());

  d = diurnal_cycle_by_season({record("s", 2024, 12, 1, 3, 0.01)});
  CHECK(d.count(Season::kDJF) == 1);
}

TEST_CASE("diurnal counts sum to observed O3 records") {
  Rng rng(4);
  std::vector<HourlyRecord> v;
  std::size_t observed = 0;
  for (int i = 0; i < 500; ++i) {
    const bool has = rng.uniform01() < 0.9;
    observed += has;
    v.push_back(record("s", 2024, 1 + static_cast<unsigned>(rng.uniform_index(12)), 1 + static_cast<unsigned>(rng.uniform_index(28)),
                       static_cast<int>(rng.uniform_index(24)), has ? std::optional<double>(rng.uniform01()) : std::nullopt));
  }
  std::size_t total = 0;
  for (const auto& [season, cycle] : diurnal_cycle_by_season(v))
    for (const auto& p : cycle)
      if (p) total += p->n;
  CHECK(total == observed);
}

TEST_CASE("weekday/weekend split and planted offset") {
  auto w = weekday_weekend_cycle({record("s", 2024, 3, 16, 13, 0.05), record("s", 2024, 3, 18, 13, 0.03)});
  CHECK(w.weekend[13] == 0.05);  // Saturday
  CHECK(w.weekday[13] == 0.03);  // Monday
  CHECK_FALSE(w.weekend[12].has_value());

  std::vector<HourlyRecord> v;
  Rng rng(8);
  for (int day = 0; day < 28; ++day) {
    const auto d = add_days(make_date(2024, 5, 6), day);
    for (int h = 0; h < 24; ++h) {
      const double base = 0.02 + 0.001 * h;
      v.push_back(record("s", year_of(d), month_of(d), day_of(d), h, is_weekend(d) ? base + 0.01 : base));
    }
  }
  w = weekday_weekend_cycle(v);
  for (int h = 0; h < 24; ++h) CHECK(*w.weekend[h] - *w.weekday[h] == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("aggregations are independent of record order") {
  Rng rng(12);
  std::vector<HourlyRecord> v;
  for (int i = 0; i < 800; ++i) {
    v.push_back(record("s", 2024 + static_cast<int>(rng.uniform_index(2)), 1 + static_cast<unsigned>(rng.uniform_index(12)),
                       1 + static_cast<unsigned>(rng.uniform_index(28)), static_cast<int>(rng.uniform_index(24)),
                       rng.uniform01()));
  }
  auto shuffled = v;
  rng.shuffle(shuffled.begin(), shuffled.end());
  auto text = [](const std::vector<HourlyRecord>& r) {
    std::ostringstream out;
    write_monthly_mean_csv(out, monthly_mean_series(r));
    write_monthly_climatology_csv(out, monthly_climatology(r));
    write_diurnal_csv(out, diurnal_cycle_by_season(r));
    write_weekday_weekend_csv(out, weekday_weekend_cycle(r));
    return out.str();
  };
  CHECK(text(v) == text(shuffled));
}

TEST_CASE("csv headers") {
  const auto v = full_year(12, 0.02);
  std::ostringstream a, b, c, d;
  write_monthly_mean_csv(a, monthly_mean_series(v));
  write_monthly_climatology_csv(b, monthly_climatology(v));
  write_diurnal_csv(c, diurnal_cycle_by_season(v));
  write_weekday_weekend_csv(d, weekday_weekend_cycle(v));
  CHECK(a.str().rfind("year,month,o3_mean_ppm,n\n", 0) == 0);
  CHECK(b.str().rfind("month,o3_mean_ppm,q25_ppm,q75_ppm,n\n", 0) == 0);
  CHECK(c.str().rfind("season,hour,o3_mean_ppm,q25_ppm,q75_ppm,n\n", 0) == 0);
  CHECK(d.str().rfind("group,hour,o3_mean_ppm\n", 0) == 0);
}
