#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ekma/features.hpp"
#include "ekma/forest.hpp"
#include "ekma/ingest.hpp"

namespace ekma {

struct Metrics {
  double r2 = 0.0;  // NaN when the observed values are constant
  double rmse = 0.0;
  std::size_t n_test = 0;
};

struct ImportanceEntry {
  std::string feature;
  double delta_rmse = 0.0;  // mean over repeats
  std::vector<double> per_repeat;
};

template <class T>
struct Partition {
  T train;
  T test;
  std::size_t discarded = 0;
};

// Partitions by calendar year of the local timestamp. Throws when either side is empty.
Partition<std::vector<HourlyRecord>> temporal_split(const std::vector<HourlyRecord>& records, int train_year,
                                                    int test_year);
// Same rule applied to keyed matrix rows.
Partition<FeatureMatrix> temporal_split(const FeatureMatrix& m, int train_year, int test_year);

// R^2 against the mean of y_true, RMSE. A constant y_true yields r2 = NaN.
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

// Increase in test RMSE after shuffling each column, `repeats` times per
// column with generator derive_seed(seed, {column, repeat}). Sorted by
// descending delta, ties in column order.
std::vector<ImportanceEntry> permutation_importance(const ForestModel& model, const FeatureMatrix& x_test,
                                                    std::span<const double> y_test, int repeats, std::uint64_t seed);

void write_metrics(std::ostream& out, const Metrics& m);
void write_importance_csv(std::ostream& out, const std::vector<ImportanceEntry>& entries);

}  // namespace ekma
