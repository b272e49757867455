#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ekma/calendar.hpp"
#include "ekma/ingest.hpp"

namespace ekma {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// Canonical predictor order.
inline constexpr std::array<std::string_view, 11> kFeatureColumns = {
    "no2", "co", "pm25", "latitude", "longitude", "hour_sin", "hour_cos", "dow_sin", "dow_cos", "month_sin", "month_cos"};

enum FeatureColumn : std::size_t {
  kNo2 = 0, kCo, kPm25, kLatitude, kLongitude, kHourSin, kHourCos, kDowSin, kDowCos, kMonthSin, kMonthCos
};

struct RowKey {
  std::string site_key;
  Timestamp time;

  friend bool operator==(const RowKey&, const RowKey&) = default;
};

// Row-major numeric matrix with named columns. NaN marks a missing cell.
// `keys` and `target` are either empty or have one entry per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> names, std::size_t rows)
      : names_(std::move(names)), rows_(rows), values_(rows * names_.size(), 0.0) {}

  static FeatureMatrix with_canonical_columns(std::size_t rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& column_names() const { return names_; }

  double& at(std::size_t r, std::size_t c) { return values_[r * names_.size() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * names_.size() + c]; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
  const std::vector<double>& values() const { return values_; }

  std::vector<RowKey>& keys() { return keys_; }
  const std::vector<RowKey>& keys() const { return keys_; }
  std::vector<double>& target() { return target_; }
  const std::vector<double>& target() const { return target_; }
  bool has_target() const { return !target_.empty(); }

  bool has_canonical_columns() const;
  bool fully_observed() const;

  // New matrix with the given rows in the given order (keys/target carried along).
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b);

 private:
  std::vector<std::string> names_;
  std::size_t rows_ = 0;
  std::vector<double> values_;
  std::vector<RowKey> keys_;
  std::vector<double> target_;
};

// Bitwise FNV-1a digest over the values (and target) of a matrix; used as a
// fingerprint and for "column untouched" checks.
std::uint64_t checksum(const FeatureMatrix& m);
std::uint64_t checksum_columns(const FeatureMatrix& m, std::span<const std::size_t> columns);

struct CyclicPair {
  double sin_component;
  double cos_component;
};

// (sin(2*pi*value/period), cos(2*pi*value/period)). Throws unless
// 0 <= value < period and period is 24, 7 or 12.
CyclicPair encode_cyclic(int value, int period);

// One row per record, canonical columns, target from o3 (NaN when absent).
FeatureMatrix build_features(const std::vector<HourlyRecord>& records);

// CSV: site_key,date_local,hour_local,<11 features>,o3
void write_features_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_features_csv(std::istream& in);

}  // namespace ekma
