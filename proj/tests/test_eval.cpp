#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ekma/error.hpp"
#include "ekma/eval.hpp"
#include "ekma/features.hpp"
#include "ekma/parallel.hpp"
#include "helpers.hpp"

using namespace ekma;

TEST_CASE("temporal_split: by calendar year, others discarded") {
  std::vector<HourlyRecord> v = {testing::record("s", 2024, 1, 1, 0, 0.01), testing::record("s", 2025, 1, 1, 0, 0.02),
                                 testing::record("s", 2023, 12, 31, 23, 0.03),
                                 testing::record("s", 2024, 12, 31, 23, 0.04)};
  const auto p = temporal_split(v, 2024, 2025);
  CHECK(p.train.size() == 2);
  CHECK(p.test.size() == 1);
  CHECK(p.discarded == 1);
  CHECK(p.test[0].o3 == 0.02);

  const auto m = temporal_split(build_features(v), 2024, 2025);
  CHECK(m.train.rows() == 2);
  CHECK(m.test.rows() == 1);
  CHECK(m.discarded == 1);
  CHECK(m.test.target()[0] == 0.02);
}

TEST_CASE("temporal_split: empty partition and equal years are fatal") {
  std::vector<HourlyRecord> v = {testing::record("s", 2024, 1, 1, 0, 0.01)};
  CHECK_THROWS_AS(temporal_split(v, 2024, 2025), Error);
  CHECK_THROWS_AS(temporal_split(v, 2024, 2024), Error);
}

TEST_CASE("metrics: perfect, baseline and hand-computed cases") {
  const std::vector<double> y = {0.01, 0.02, 0.05, 0.04};
  auto m = compute_metrics(y, y);
  CHECK(m.rmse == 0.0);
  CHECK(m.r2 == 1.0);
  CHECK(m.n_test == 4);

  const double mean = 0.03;
  m = compute_metrics(y, std::vector<double>(4, mean));
  CHECK(std::abs(m.r2) < 1e-12);

  m = compute_metrics(std::vector<double>{0, 0, 1, 1}, std::vector<double>{0, 0, 0, 1});
  CHECK(m.rmse == 0.5);
  CHECK(m.r2 == 0.0);
}

TEST_CASE("metrics: constant truth gives NaN r2; length mismatch is fatal") {
  const auto m = compute_metrics(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 1});
  CHECK(std::isnan(m.r2));
  CHECK(m.rmse > 0);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("metrics: symmetry and scaling properties") {
  Rng rng(31);
  std::vector<double> y(50), p(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = rng.uniform(0, 1);
    p[i] = y[i] + 0.1 * rng.normal();
  }
  const auto base = compute_metrics(y, p);
  std::vector<double> ry(y.rbegin(), y.rend()), rp(p.rbegin(), p.rend());
  const auto rev = compute_metrics(ry, rp);
  CHECK(rev.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
  CHECK(rev.r2 == doctest::Approx(base.r2).epsilon(1e-12));

  std::vector<double> sy(50), sp(50), ay(50), ap(50);
  for (std::size_t i = 0; i < 50; ++i) {
    sy[i] = -3.0 * y[i];
    sp[i] = -3.0 * p[i];
    ay[i] = 2.0 + 5.0 * y[i];
    ap[i] = 2.0 + 5.0 * p[i];
  }
  CHECK(compute_metrics(sy, sp).rmse == doctest::Approx(3.0 * base.rmse).epsilon(1e-12));
  CHECK(compute_metrics(ay, ap).r2 == doctest::Approx(base.r2).epsilon(1e-10));
}

namespace {

struct Planted {
  FeatureMatrix x;
  std::vector<double> y;
};

// y = g(x0) with x1 pure noise.
Planted planted(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Planted d{testing::plain_matrix(n, 2), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    d.x.at(r, 0) = rng.uniform(0, 1);
    d.x.at(r, 1) = rng.uniform(0, 1);
    d.y[r] = std::tanh(3 * d.x.at(r, 0)) + 0.05 * rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("importance: constant model gives exact zeros") {
  const auto d = planted(100, 1);
  ForestParams params;
  params.num_trees = 3;
  const auto model = train_forest(d.x, std::vector<double>(100, 0.05), params);
  for (const auto& e : permutation_importance(model, d.x, d.y, 4, 9)) {
    CHECK(e.delta_rmse == 0.0);
    for (double v : e.per_repeat) CHECK(v == 0.0);
  }
}

TEST_CASE("importance: structure, ranking, determinism") {
  const auto train = planted(400, 2), test = planted(300, 3);
  ForestParams params;
  params.num_trees = 40;
  params.mtry = 2;
  const auto model = train_forest(train.x, train.y, params);
  const auto before = checksum(test.x);
  set_thread_count(1);
  const auto a = permutation_importance(model, test.x, test.y, 5, 17);
  set_thread_count(3);
  const auto b = permutation_importance(model, test.x, test.y, 5, 17);
  set_thread_count(0);
  CHECK(checksum(test.x) == before);
  REQUIRE(a.size() == 2);
  CHECK(a[0].feature == "x0");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].feature == b[i].feature);
    CHECK(a[i].per_repeat == b[i].per_repeat);
    CHECK(a[i].per_repeat.size() == 5);
    const double mean = std::accumulate(a[i].per_repeat.begin(), a[i].per_repeat.end(), 0.0) / 5.0;
    CHECK(a[i].delta_rmse == doctest::Approx(mean).epsilon(1e-14));
  }
  CHECK(a[0].delta_rmse >= a[1].delta_rmse);
}

TEST_CASE("report formats") {
  std::ostringstream m;
  write_metrics(m, Metrics{0.5, 0.006, 17});
  CHECK(m.str().find("r2 = 0.5\n") != std::string::npos);
  CHECK(m.str().find("rmse = 0.006\n") != std::string::npos);
  CHECK(m.str().find("n_test = 17\n") != std::string::npos);

  std::ostringstream c;
  write_importance_csv(c, {{"no2", 0.002, {0.001, 0.003}}, {"co", 0.0, {0.0, 0.0}}});
  CHECK(c.str() == "feature,delta_rmse,repeat_0,repeat_1\nno2,0.002,0.001,0.003\nco,0,0,0\n");
}
