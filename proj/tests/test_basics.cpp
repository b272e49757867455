#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ekma/calendar.hpp"
#include "ekma/config.hpp"
#include "ekma/csv.hpp"
#include "ekma/error.hpp"
#include "ekma/rng.hpp"

using namespace ekma;

TEST_CASE("calendar: day of week is Monday-based") {
  CHECK(day_of_week(make_date(2024, 1, 1)) == 0);   // Monday
  CHECK(day_of_week(make_date(2024, 3, 15)) == 4);  // Friday
  CHECK(day_of_week(make_date(2024, 3, 16)) == 5);
  CHECK(is_weekend(make_date(2024, 3, 17)));
  CHECK_FALSE(is_weekend(make_date(2024, 3, 18)));
}

TEST_CASE("calendar: iso dates") {
  CHECK(format_iso_date(make_date(2025, 2, 7)) == "2025-02-07");
  CHECK(parse_iso_date("2024-02-29") == make_date(2024, 2, 29));
  CHECK_FALSE(parse_iso_date("2023-02-29").has_value());
  CHECK_FALSE(parse_iso_date("2024-2-9").has_value());
  CHECK_FALSE(parse_iso_date("2024-02-09x").has_value());
}

TEST_CASE("calendar: span hours") {
  DateRange leap{make_date(2024, 1, 1), make_date(2024, 12, 31)};
  CHECK(leap.hours() == 366 * 24);
  CHECK(leap.contains(make_date(2024, 6, 1)));
  CHECK_FALSE(leap.contains(make_date(2025, 1, 1)));
  CHECK(add_days(make_date(2024, 2, 28), 2) == make_date(2024, 3, 1));
}

TEST_CASE("csv: quoted fields") {
  auto f = csv::split_line(R"("06","037","a, b","say ""hi""",,x)" "\r");
  REQUIRE(f.size() == 6);
  CHECK(f[0] == "06");
  CHECK(f[2] == "a, b");
  CHECK(f[3] == "say \"hi\"");
  CHECK(f[4].empty());
  CHECK(f[5] == "x");
}

TEST_CASE("csv: numbers") {
  CHECK(csv::parse_double("0.041") == doctest::Approx(0.041));
  CHECK_FALSE(csv::parse_double("NA").has_value());
  CHECK_FALSE(csv::parse_double("").has_value());
  CHECK_FALSE(csv::parse_double("1.5x").has_value());
  CHECK(csv::parse_long("0002") == 2);
  CHECK(csv::format_exact(std::numeric_limits<double>::quiet_NaN()).empty());
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.0}) {
    CHECK(*csv::parse_double(csv::format_exact(v)) == v);
  }
  CHECK(csv::format_sig(0.0412345678) == "0.0412346");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
}

TEST_CASE("rng: derived streams are distinct and reproducible") {
  CHECK(derive_seed(42, {0}) == derive_seed(42, {0}));
  CHECK(derive_seed(42, {0}) != derive_seed(42, {1}));
  CHECK(derive_seed(42, {1, 2}) != derive_seed(42, {2, 1}));
  CHECK(derive_seed(42, {0}) != derive_seed(43, {0}));
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("rng: uniform_index covers its range") {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_index(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("rng: normal draws have unit scale") {
  Rng rng(11);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("config: parse, precedence of later lines, round trip") {
  PipelineConfig c;
  std::istringstream in(
      "# comment\n"
      "forest.num_trees = 25\n"
      "ingest.sites = 06-037-0002, 06-037-1103\n"
      "ekma.tau = 1.5\n"
      "synth.regime = NOX_LIMITED\n"
      "forest.num_trees = 30\n");
  load_config(in, c);
  CHECK(c.forest.num_trees == 30);
  CHECK(c.sites.allowlist == std::vector<std::string>{"06-037-0002", "06-037-1103"});
  CHECK(c.tau == 1.5);
  CHECK(c.synth.regime == Regime::kNoxLimited);

  std::ostringstream out;
  write_config(out, c);
  PipelineConfig back;
  std::istringstream again(out.str());
  load_config(again, back);
  std::ostringstream out2;
  write_config(out2, back);
  CHECK(out.str() == out2.str());
}

TEST_CASE("config: unknown keys and bad values are fatal") {
  PipelineConfig c;
  std::istringstream typo("forest.num_tree = 5\n");
  CHECK_THROWS_AS(load_config(typo, c), Error);
  CHECK_THROWS_AS(apply_setting(c, "impute.k", "five"), Error);
  CHECK_THROWS_AS(apply_setting(c, "synth.regime", "BOTH"), Error);
  std::istringstream no_eq("forest.seed 5\n");
  CHECK_THROWS_AS(load_config(no_eq, c), Error);
}

TEST_CASE("config: validate rejects out-of-range settings") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.knn_k = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PipelineConfig{};
  c.train_year = c.test_year;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PipelineConfig{};
  c.coverage_min = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}
