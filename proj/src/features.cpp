#include "ekma/features.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

FeatureMatrix FeatureMatrix::with_canonical_columns(std::size_t rows) {
  return FeatureMatrix(std::vector<std::string>(kFeatureColumns.begin(), kFeatureColumns.end()), rows);
}

bool FeatureMatrix::has_canonical_columns() const {
  return std::equal(names_.begin(), names_.end(), kFeatureColumns.begin(), kFeatureColumns.end());
}

bool FeatureMatrix::fully_observed() const {
  return std::none_of(values_.begin(), values_.end(), [](double v) { return is_missing(v); });
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(names_, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
    if (!keys_.empty()) out.keys_.push_back(keys_[rows[i]]);
    if (!target_.empty()) out.target_.push_back(target_[rows[i]]);
  }
  return out;
}

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= bits & 0xff;
    h *= kFnvPrime;
    bits >>= 8;
  }
}

}  // namespace

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
  return a.names_ == b.names_ && a.rows_ == b.rows_ && same_bits(a.values_, b.values_) && a.keys_ == b.keys_ &&
         same_bits(a.target_, b.target_);
}

std::uint64_t checksum(const FeatureMatrix& m) {
  std::uint64_t h = kFnvOffset;
  for (const double v : m.values()) fnv_mix(h, v);
  for (const double v : m.target()) fnv_mix(h, v);
  return h;
}

std::uint64_t checksum_columns(const FeatureMatrix& m, std::span<const std::size_t> columns) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const std::size_t c : columns) fnv_mix(h, m.at(r, c));
  }
  return h;
}

CyclicPair encode_cyclic(int value, int period) {
  if (period != 24 && period != 7 && period != 12) {
    throw Error("encode_cyclic: unsupported period " + std::to_string(period));
  }
  if (value < 0 || value >= period) {
    throw Error("encode_cyclic: value " + std::to_string(value) + " outside [0, " + std::to_string(period) + ")");
  }
  // Exact values on the quarter points keep sin(pi) and cos(pi/2) at zero.
  const int quarter = 4 * value;
  if (quarter % period == 0) {
    static constexpr CyclicPair kQuarters[] = {{0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}};
    return kQuarters[quarter / period];
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(value) / static_cast<double>(period);
  return {std::sin(angle), std::cos(angle)};
}

FeatureMatrix build_features(const std::vector<HourlyRecord>& records) {
  if (records.empty()) {
    throw Error("build_features: no records");
  }
  FeatureMatrix m = FeatureMatrix::with_canonical_columns(records.size());
  m.keys().reserve(records.size());
  m.target().reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const HourlyRecord& r = records[i];
    auto row = m.row(i);
    row[kNo2] = r.no2.value_or(kMissing);
    row[kCo] = r.co.value_or(kMissing);
    row[kPm25] = r.pm25.value_or(kMissing);
    row[kLatitude] = r.latitude;
    row[kLongitude] = r.longitude;
    const auto hour = encode_cyclic(r.time.hour, 24);
    const auto dow = encode_cyclic(day_of_week(r.time.date), 7);
    const auto month = encode_cyclic(month_of(r.time.date) - 1, 12);
    row[kHourSin] = hour.sin_component;
    row[kHourCos] = hour.cos_component;
    row[kDowSin] = dow.sin_component;
    row[kDowCos] = dow.cos_component;
    row[kMonthSin] = month.sin_component;
    row[kMonthCos] = month.cos_component;
    m.keys().push_back(RowKey{r.site_key, r.time});
    m.target().push_back(r.o3.value_or(kMissing));
  }
  return m;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& m) {
  if (m.keys().size() != m.rows()) {
    throw Error("write_features_csv: matrix has no row keys");
  }
  out << "site_key,date_local,hour_local";
  for (const auto& name : m.column_names()) out << ',' << name;
  out << ",o3\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const RowKey& k = m.keys()[r];
    out << csv::escape(k.site_key) << ',' << format_iso_date(k.time.date) << ',' << k.time.hour;
    for (const double v : m.row(r)) out << ',' << csv::format_exact(v);
    out << ',' << (m.has_target() ? csv::format_exact(m.target()[r]) : std::string()) << '\n';
  }
}

FeatureMatrix read_features_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) {
    throw FormatError("features csv: empty file");
  }
  const auto header = csv::split_line(line);
  if (header.size() < 5 || header[0] != "site_key" || header[1] != "date_local" || header[2] != "hour_local" ||
      header.back() != "o3") {
    throw FormatError("features csv: unexpected header \"" + line + "\"");
  }
  std::vector<std::string> names(header.begin() + 3, header.end() - 1);
  const std::size_t p = names.size();

  std::vector<std::vector<std::string>> rows;
  while (csv::next_line(in, line)) {
    rows.push_back(csv::split_line(line));
  }
  FeatureMatrix m(std::move(names), rows.size());
  m.keys().reserve(rows.size());
  m.target().reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    const std::string where = "features csv row " + std::to_string(r + 1);
    if (f.size() != p + 4) throw FormatError(where + ": expected " + std::to_string(p + 4) + " fields");
    const auto date = parse_iso_date(f[1]);
    const auto hour = csv::parse_long(f[2]);
    if (!date || !hour || *hour < 0 || *hour > 23) throw FormatError(where + ": bad key");
    m.keys().push_back(RowKey{f[0], Timestamp{*date, static_cast<int>(*hour)}});
    for (std::size_t c = 0; c <= p; ++c) {
      const std::string& field = f[3 + c];
      double v = kMissing;
      if (!field.empty()) {
        const auto parsed = csv::parse_double(field);
        if (!parsed) throw FormatError(where + ": bad number \"" + field + "\"");
        v = *parsed;
      }
      if (c < p) {
        m.at(r, c) = v;
      } else {
        m.target().push_back(v);
      }
    }
  }
  return m;
}

}  // namespace ekma
