#include "ekma/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"
#include "ekma/rng.hpp"

namespace ekma {

namespace {

void require_nonempty(std::size_t train, std::size_t test, int train_year, int test_year) {
  if (train_year == test_year) throw Error("temporal_split: train and test years must differ");
  if (train == 0) throw Error("temporal_split: no rows in train year " + std::to_string(train_year));
  if (test == 0) throw Error("temporal_split: no rows in test year " + std::to_string(test_year));
}

}  // namespace

Partition<std::vector<HourlyRecord>> temporal_split(const std::vector<HourlyRecord>& records, int train_year,
                                                    int test_year) {
  Partition<std::vector<HourlyRecord>> out;
  for (const auto& r : records) {
    const int y = year_of(r.time.date);
    if (y == train_year) {
      out.train.push_back(r);
    } else if (y == test_year) {
      out.test.push_back(r);
    } else {
      ++out.discarded;
    }
  }
  require_nonempty(out.train.size(), out.test.size(), train_year, test_year);
  return out;
}

Partition<FeatureMatrix> temporal_split(const FeatureMatrix& m, int train_year, int test_year) {
  if (m.keys().size() != m.rows()) throw Error("temporal_split: matrix has no row keys");
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t discarded = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const int y = year_of(m.keys()[r].time.date);
    if (y == train_year) {
      train.push_back(r);
    } else if (y == test_year) {
      test.push_back(r);
    } else {
      ++discarded;
    }
  }
  require_nonempty(train.size(), test.size(), train_year, test_year);
  return {m.select_rows(train), m.select_rows(test), discarded};
}

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("compute_metrics: length mismatch");
  if (y_true.empty()) throw Error("compute_metrics: no observations");
  const auto n = static_cast<double>(y_true.size());
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    sse += e * e;
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  Metrics m;
  m.n_test = y_true.size();
  m.rmse = std::sqrt(sse / n);
  m.r2 = sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
  return m;
}

std::vector<ImportanceEntry> permutation_importance(const ForestModel& model, const FeatureMatrix& x_test,
                                                    std::span<const double> y_test, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw Error("permutation_importance: repeats must be >= 1");
  const double baseline = compute_metrics(y_test, predict(model, x_test)).rmse;
  const std::size_t p = x_test.cols();
  const auto jobs = static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(repeats));
  std::vector<double> deltas(static_cast<std::size_t>(jobs));

  // Each (column, repeat) job shuffles a private copy of one column.
  // predict() nests its own parallel loop, which runs serially inside this region.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t col = static_cast<std::size_t>(job) / static_cast<std::size_t>(repeats);
    const std::size_t rep = static_cast<std::size_t>(job) % static_cast<std::size_t>(repeats);
    FeatureMatrix shuffled = x_test;
    std::vector<double> column(x_test.rows());
    for (std::size_t r = 0; r < x_test.rows(); ++r) column[r] = x_test.at(r, col);
    Rng rng(derive_seed(seed, {col, rep}));
    rng.shuffle(column.begin(), column.end());
    for (std::size_t r = 0; r < x_test.rows(); ++r) shuffled.at(r, col) = column[r];
    deltas[static_cast<std::size_t>(job)] = compute_metrics(y_test, predict(model, shuffled)).rmse - baseline;
  }

  std::vector<ImportanceEntry> entries(p);
  for (std::size_t c = 0; c < p; ++c) {
    auto& e = entries[c];
    e.feature = x_test.column_names()[c];
    const auto first = deltas.begin() + static_cast<std::ptrdiff_t>(c * static_cast<std::size_t>(repeats));
    e.per_repeat.assign(first, first + repeats);
    e.delta_rmse = std::accumulate(e.per_repeat.begin(), e.per_repeat.end(), 0.0) / static_cast<double>(repeats);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.delta_rmse > b.delta_rmse; });
  return entries;
}

void write_metrics(std::ostream& out, const Metrics& m) {
  out << "r2 = " << (std::isnan(m.r2) ? std::string("nan") : csv::format_exact(m.r2)) << '\n';
  out << "rmse = " << csv::format_exact(m.rmse) << '\n';
  out << "n_test = " << m.n_test << '\n';
}

void write_importance_csv(std::ostream& out, const std::vector<ImportanceEntry>& entries) {
  std::size_t repeats = entries.empty() ? 0 : entries.front().per_repeat.size();
  out << "feature,delta_rmse";
  for (std::size_t r = 0; r < repeats; ++r) out << ",repeat_" << r;
  out << '\n';
  for (const auto& e : entries) {
    out << csv::escape(e.feature) << ',' << csv::format_exact(e.delta_rmse);
    for (const double v : e.per_repeat) out << ',' << csv::format_exact(v);
    out << '\n';
  }
}

}  // namespace ekma
