#include "ekma/impute.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

StandardizationStats compute_standardization(const FeatureMatrix& train) {
  if (train.rows() < 2) {
    throw Error("compute_standardization: need at least 2 training rows");
  }
  StandardizationStats stats;
  stats.feature_names = train.column_names();
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double v = train.at(r, c);
      if (!is_missing(v)) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) {
      throw Error("compute_standardization: column \"" + train.column_names()[c] + "\" has no observed values");
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double v = train.at(r, c);
      if (!is_missing(v)) ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    stats.means.push_back(mean);
    stats.stds.push_back(sd == 0.0 ? 1.0 : sd);
  }
  return stats;
}

namespace {

void check_columns(const FeatureMatrix& m, const StandardizationStats& stats, const char* who) {
  if (m.column_names() != stats.feature_names || stats.means.size() != m.cols() || stats.stds.size() != m.cols()) {
    throw Error(std::string(who) + ": matrix columns do not match standardization stats");
  }
}

struct Neighbour {
  double distance;
  std::size_t index;

  bool operator<(const Neighbour& o) const {
    return distance < o.distance || (distance == o.distance && index < o.index);
  }
};

void validate_knn_inputs(const FeatureMatrix& target, const FeatureMatrix& pool, const StandardizationStats& stats,
                         int k, bool self) {
  check_columns(target, stats, "knn_impute");
  check_columns(pool, stats, "knn_impute");
  if (!pool.fully_observed()) {
    throw Error("knn_impute: pool must be fully observed");
  }
  const std::size_t available = pool.rows() - (self ? 1 : 0);
  if (k < 1 || static_cast<std::size_t>(k) > available) {
    throw Error("knn_impute: k=" + std::to_string(k) + " outside [1, " + std::to_string(available) + "]");
  }
}

// Distance from target row to every pool row over the row's observed
// coordinates. Returns the observed count.
std::size_t distances_to_pool(std::span<const double> z_row, const FeatureMatrix& z_pool, std::size_t self_index,
                              std::vector<Neighbour>& out) {
  const std::size_t p = z_row.size();
  std::size_t observed = 0;
  for (const double v : z_row) observed += is_missing(v) ? 0 : 1;
  const double scale = static_cast<double>(p) / static_cast<double>(observed);
  out.clear();
  for (std::size_t j = 0; j < z_pool.rows(); ++j) {
    if (j == self_index) continue;
    const auto pj = z_pool.row(j);
    double ss = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      if (!is_missing(z_row[c])) {
        const double d = z_row[c] - pj[c];
        ss += d * d;
      }
    }
    out.push_back({std::sqrt(ss * scale), j});
  }
  return observed;
}

void fill_row_from(std::span<double> out_row, std::span<const double> raw_row, const FeatureMatrix& pool,
                   std::span<const Neighbour> neighbours) {
  for (std::size_t c = 0; c < raw_row.size(); ++c) {
    if (!is_missing(raw_row[c])) continue;
    double sum = 0.0;
    for (const auto& nb : neighbours) sum += pool.at(nb.index, c);
    out_row[c] = sum / static_cast<double>(neighbours.size());
  }
}

bool row_has_missing(std::span<const double> row) {
  return std::any_of(row.begin(), row.end(), [](double v) { return is_missing(v); });
}

void throw_no_observed(std::size_t r) {
  throw Error("knn_impute: row " + std::to_string(r) + " has no observed features");
}

// Distance between two training rows over their commonly observed
// coordinates; infinity when they share none.
double pair_distance(std::span<const double> a, std::span<const double> b) {
  double ss = 0.0;
  std::size_t common = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!is_missing(a[c]) && !is_missing(b[c])) {
      const double d = a[c] - b[c];
      ss += d * d;
      ++common;
    }
  }
  if (common == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(ss * (static_cast<double>(a.size()) / static_cast<double>(common)));
}

void check_training_inputs(const FeatureMatrix& train, const StandardizationStats& stats, int k) {
  check_columns(train, stats, "impute_training_pool");
  if (k < 1 || static_cast<std::size_t>(k) >= train.rows()) {
    throw Error("impute_training_pool: k=" + std::to_string(k) + " outside [1, " + std::to_string(train.rows() - 1) +
                "]");
  }
}

// Imputes row r of the training matrix. `dist` and `donors` are scratch.
void impute_training_row(std::size_t r, const FeatureMatrix& train, const FeatureMatrix& z, int k,
                         std::vector<double>& dist, std::vector<Neighbour>& donors, FeatureMatrix& out,
                         bool full_sort) {
  const auto zr = z.row(r);
  if (std::all_of(zr.begin(), zr.end(), [](double v) { return is_missing(v); })) throw_no_observed(r);
  dist.assign(train.rows(), std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < train.rows(); ++j) {
    if (j != r) dist[j] = pair_distance(zr, z.row(j));
  }
  for (std::size_t c = 0; c < train.cols(); ++c) {
    if (!is_missing(train.at(r, c))) continue;
    donors.clear();
    for (std::size_t j = 0; j < train.rows(); ++j) {
      if (j != r && std::isfinite(dist[j]) && !is_missing(train.at(j, c))) donors.push_back({dist[j], j});
    }
    if (donors.empty()) {
      throw Error("impute_training_pool: no donor for row " + std::to_string(r) + " column \"" +
                  train.column_names()[c] + "\"");
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), donors.size());
    if (full_sort) {
      std::sort(donors.begin(), donors.end());
    } else {
      std::partial_sort(donors.begin(), donors.begin() + static_cast<std::ptrdiff_t>(take), donors.end());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += train.at(donors[i].index, c);
    out.at(r, c) = sum / static_cast<double>(take);
  }
}

}  // namespace

FeatureMatrix standardize(const FeatureMatrix& m, const StandardizationStats& stats) {
  check_columns(m, stats, "standardize");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!is_missing(row[c])) row[c] = (row[c] - stats.means[c]) / stats.stds[c];
    }
  }
  return out;
}

FeatureMatrix knn_impute(const FeatureMatrix& target, const FeatureMatrix& pool, const StandardizationStats& stats,
                         int k) {
  const bool self = &target == &pool;
  validate_knn_inputs(target, pool, stats, k, self);
  const FeatureMatrix z_target = standardize(target, stats);
  const FeatureMatrix z_pool = standardize(pool, stats);
  FeatureMatrix out = target;
  const auto n = static_cast<std::ptrdiff_t>(target.rows());
  const auto kk = static_cast<std::ptrdiff_t>(k);

  // Row errors are recorded and rethrown outside the parallel region.
  std::ptrdiff_t bad_row = n;
#pragma omp parallel
  {
    std::vector<Neighbour> dist;
#pragma omp for schedule(dynamic, 16) reduction(min : bad_row)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      const auto ur = static_cast<std::size_t>(r);
      if (!row_has_missing(target.row(ur))) continue;
      if (distances_to_pool(z_target.row(ur), z_pool, self ? ur : pool.rows(), dist) == 0) {
        bad_row = std::min(bad_row, r);
        continue;
      }
      std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
      fill_row_from(out.row(ur), target.row(ur), pool, std::span<const Neighbour>(dist.data(), dist.data() + kk));
    }
  }
  if (bad_row < n) throw_no_observed(static_cast<std::size_t>(bad_row));
  return out;
}

FeatureMatrix impute_training_pool(const FeatureMatrix& train, const StandardizationStats& stats, int k) {
  check_training_inputs(train, stats, k);
  const FeatureMatrix z = standardize(train, stats);
  FeatureMatrix out = train;
  const auto n = static_cast<std::ptrdiff_t>(train.rows());
  std::ptrdiff_t failed = n;
  std::string message;
#pragma omp parallel
  {
    std::vector<double> dist;
    std::vector<Neighbour> donors;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      const auto ur = static_cast<std::size_t>(r);
      if (!row_has_missing(train.row(ur))) continue;
      try {
        impute_training_row(ur, train, z, k, dist, donors, out, false);
      } catch (const Error& e) {
#pragma omp critical(ekma_impute_error)
        if (r < failed) {
          failed = r;
          message = e.what();
        }
      }
    }
  }
  if (failed < n) throw Error(message);
  return out;
}

namespace reference {

FeatureMatrix knn_impute(const FeatureMatrix& target, const FeatureMatrix& pool, const StandardizationStats& stats,
                         int k) {
  const bool self = &target == &pool;
  validate_knn_inputs(target, pool, stats, k, self);
  const FeatureMatrix z_target = standardize(target, stats);
  const FeatureMatrix z_pool = standardize(pool, stats);
  FeatureMatrix out = target;
  std::vector<Neighbour> dist;
  for (std::size_t r = 0; r < target.rows(); ++r) {
    if (!row_has_missing(target.row(r))) continue;
    if (distances_to_pool(z_target.row(r), z_pool, self ? r : pool.rows(), dist) == 0) throw_no_observed(r);
    std::sort(dist.begin(), dist.end());
    fill_row_from(out.row(r), target.row(r), pool,
                  std::span<const Neighbour>(dist.data(), static_cast<std::size_t>(k)));
  }
  return out;
}

FeatureMatrix impute_training_pool(const FeatureMatrix& train, const StandardizationStats& stats, int k) {
  check_training_inputs(train, stats, k);
  const FeatureMatrix z = standardize(train, stats);
  FeatureMatrix out = train;
  std::vector<double> dist;
  std::vector<Neighbour> donors;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    if (row_has_missing(train.row(r))) impute_training_row(r, train, z, k, dist, donors, out, true);
  }
  return out;
}

}  // namespace reference

void write_standardization(std::ostream& out, const StandardizationStats& stats) {
  out << "format = ekma-standardization\n";
  out << "version = 1\n";
  out << "features = " << stats.feature_names.size() << '\n';
  for (std::size_t c = 0; c < stats.feature_names.size(); ++c) {
    out << stats.feature_names[c] << " = " << csv::format_exact(stats.means[c]) << ' '
        << csv::format_exact(stats.stds[c]) << '\n';
  }
}

StandardizationStats read_standardization(std::istream& in) {
  auto next_kv = [&in](std::string& key, std::string& value) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) throw FormatError("standardization: malformed line \"" + line + "\"");
      key = line.substr(0, eq);
      value = line.substr(eq + 3);
      return true;
    }
    return false;
  };
  std::string key;
  std::string value;
  if (!next_kv(key, value) || key != "format" || value != "ekma-standardization") {
    throw FormatError("standardization: missing format tag");
  }
  if (!next_kv(key, value) || key != "version" || value != "1") {
    throw FormatError("standardization: unsupported version \"" + value + "\"");
  }
  if (!next_kv(key, value) || key != "features") throw FormatError("standardization: missing feature count");
  const auto count = csv::parse_long(value);
  if (!count || *count < 0) throw FormatError("standardization: bad feature count");

  StandardizationStats stats;
  for (long i = 0; i < *count; ++i) {
    if (!next_kv(key, value)) throw FormatError("standardization: truncated file");
    std::istringstream fields(value);
    std::string mean_text;
    std::string sd_text;
    fields >> mean_text >> sd_text;
    const auto mean = csv::parse_double(mean_text);
    const auto sd = csv::parse_double(sd_text);
    if (!mean || !sd || *sd <= 0.0) throw FormatError("standardization: bad entry for \"" + key + "\"");
    stats.feature_names.push_back(key);
    stats.means.push_back(*mean);
    stats.stds.push_back(*sd);
  }
  return stats;
}

}  // namespace ekma
