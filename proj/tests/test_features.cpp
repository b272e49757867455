#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ekma/error.hpp"
#include "ekma/features.hpp"
#include "helpers.hpp"

using namespace ekma;

TEST_CASE("encode_cyclic: quarter points are exact") {
  auto e = encode_cyclic(0, 24);
  CHECK(e.sin_component == 0.0);
  CHECK(e.cos_component == 1.0);
  e = encode_cyclic(6, 24);
  CHECK(e.sin_component == 1.0);
  CHECK(e.cos_component == 0.0);
  e = encode_cyclic(18, 24);
  CHECK(e.sin_component == -1.0);
  CHECK(std::abs(e.cos_component) < 1e-15);
  e = encode_cyclic(3, 12);
  CHECK(e.sin_component == 1.0);
}

TEST_CASE("encode_cyclic: out of range is fatal") {
  CHECK_THROWS_AS(encode_cyclic(24, 24), Error);
  CHECK_THROWS_AS(encode_cyclic(-1, 7), Error);
  CHECK_THROWS_AS(encode_cyclic(1, 10), Error);
}

TEST_CASE("encode_cyclic: unit circle and atan2 round trip") {
  for (int period : {24, 7, 12}) {
    for (int v = 0; v < period; ++v) {
      const auto e = encode_cyclic(v, period);
      CHECK(std::abs(e.sin_component * e.sin_component + e.cos_component * e.cos_component - 1.0) <= 1e-12);
      double angle = std::atan2(e.sin_component, e.cos_component);
      if (angle < 0) angle += 2.0 * std::numbers::pi;
      const double want = 2.0 * std::numbers::pi * v / period;
      double diff = std::fmod(std::abs(angle - want), 2.0 * std::numbers::pi);
      diff = std::min(diff, 2.0 * std::numbers::pi - diff);
      CHECK(diff <= 1e-9);
    }
  }
}

TEST_CASE("build_features: calendar mapping") {
  // 2024-03-15 is a Friday.
  const auto m = build_features({testing::record("s", 2024, 3, 15, 13, 0.04, 20.0, 0.5, 9.0)});
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 11);
  CHECK(m.has_canonical_columns());
  const auto h = encode_cyclic(13, 24), d = encode_cyclic(4, 7), mo = encode_cyclic(2, 12);
  CHECK(m.at(0, kHourSin) == h.sin_component);
  CHECK(m.at(0, kHourCos) == h.cos_component);
  CHECK(m.at(0, kDowSin) == d.sin_component);
  CHECK(m.at(0, kDowCos) == d.cos_component);
  CHECK(m.at(0, kMonthSin) == mo.sin_component);
  CHECK(m.at(0, kMonthCos) == mo.cos_component);
  CHECK(m.at(0, kNo2) == 20.0);
  CHECK(m.at(0, kCo) == 0.5);
  CHECK(m.at(0, kPm25) == 9.0);
  CHECK(m.at(0, kLatitude) == 34.05);
  CHECK(m.target()[0] == 0.04);
  CHECK(m.keys()[0].site_key == "s");
}

TEST_CASE("build_features: missing precursor and target stay missing") {
  const auto m = build_features({testing::record("s", 2024, 1, 1, 0, std::nullopt, std::nullopt, 0.3)});
  CHECK(is_missing(m.at(0, kNo2)));
  CHECK(is_missing(m.target()[0]));
  CHECK(m.at(0, kCo) == 0.3);
  for (std::size_t c = kLatitude; c < m.cols(); ++c) CHECK_FALSE(is_missing(m.at(0, c)));
}

TEST_CASE("build_features: order preserved and pure") {
  std::vector<HourlyRecord> v = {testing::record("b", 2024, 5, 1, 9, 0.01), testing::record("a", 2024, 1, 1, 3, 0.02)};
  const auto m = build_features(v);
  CHECK(m.keys()[0].site_key == "b");
  CHECK(m.keys()[1].site_key == "a");
  CHECK(m == build_features(v));
  CHECK(checksum(m) == checksum(build_features(v)));
}

TEST_CASE("features csv round trip keeps NaN and bits") {
  std::vector<HourlyRecord> v = {testing::record("06-037-0002", 2024, 7, 15, 13, 0.041, 1.0 / 3.0, std::nullopt, 8.25),
                                 testing::record("06-037-0002", 2025, 1, 1, 0, std::nullopt, 2.0, 0.1, 0.2)};
  const auto m = build_features(v);
  std::ostringstream out;
  write_features_csv(out, m);
  CHECK(out.str().rfind("site_key,date_local,hour_local,no2,co,pm25,latitude,longitude,hour_sin,hour_cos,dow_sin,"
                        "dow_cos,month_sin,month_cos,o3\n",
                        0) == 0);
  std::istringstream in(out.str());
  const auto back = read_features_csv(in);
  CHECK(back == m);
  CHECK(back.keys() == m.keys());
}

TEST_CASE("checksum_columns ignores other columns") {
  Rng rng(5);
  auto m = testing::random_matrix(10, rng);
  const std::vector<std::size_t> cols = {kPm25, kLatitude};
  const auto before = checksum_columns(m, cols);
  m.at(3, kNo2) += 1.0;
  CHECK(checksum_columns(m, cols) == before);
  m.at(3, kPm25) += 1.0;
  CHECK(checksum_columns(m, cols) != before);
}
