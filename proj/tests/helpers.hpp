#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ekma/calendar.hpp"
#include "ekma/features.hpp"
#include "ekma/ingest.hpp"
#include "ekma/rng.hpp"

namespace testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ekma-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline ekma::HourlyRecord record(const std::string& site, int y, unsigned m, unsigned d, int h,
                                 std::optional<double> o3, std::optional<double> no2 = std::nullopt,
                                 std::optional<double> co = std::nullopt, std::optional<double> pm25 = std::nullopt) {
  ekma::HourlyRecord r;
  r.site_key = site;
  r.latitude = 34.05;
  r.longitude = -118.25;
  r.time = {ekma::make_date(y, m, d), h};
  r.o3 = o3;
  r.no2 = no2;
  r.co = co;
  r.pm25 = pm25;
  return r;
}

// Canonical-column matrix of uniform draws in [0, 10) with cells set missing
// at the given rate; keys and target left empty.
inline ekma::FeatureMatrix random_matrix(std::size_t rows, ekma::Rng& rng, double missing = 0.0) {
  auto m = ekma::FeatureMatrix::with_canonical_columns(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      m.at(r, c) = rng.uniform01() < missing ? ekma::kMissing : rng.uniform(0.0, 10.0);
    }
  }
  return m;
}

// A general-purpose feature matrix with `cols` named columns x0, x1, ...
inline ekma::FeatureMatrix plain_matrix(std::size_t rows, std::size_t cols) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("x" + std::to_string(c));
  return ekma::FeatureMatrix(names, rows);
}

}  // namespace testing
