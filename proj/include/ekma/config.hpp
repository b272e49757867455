#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ekma/ekma.hpp"
#include "ekma/forest.hpp"
#include "ekma/ingest.hpp"
#include "ekma/synth.hpp"

namespace ekma {

struct PipelineConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "out";
  std::string download_base_url = "https://aqs.epa.gov/aqsweb/airdata";
  std::vector<int> years = {2024, 2025};

  SiteFilter sites;
  double coverage_min = 0.75;

  int knn_k = 5;
  ForestParams forest;
  int train_year = 2024;
  int test_year = 2025;
  int importance_repeats = 10;

  int grid_points = 11;
  BaselineCriteria baseline;
  double tau = kDefaultTau;
  int isopleth_levels = 8;
  bool svg = true;

  int threads = 0;

  SyntheticSpec synth;
  double synth_noise_fraction = 0.2;  // > 0 sets noise_sd to this fraction of the signal sd

  DateRange span() const;
  // Throws Error naming the first invalid field.
  void validate() const;
};

// Applies one `section.key = value` setting. Unknown keys and malformed
// values throw Error.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

// Reads `section.key = value` lines; '#' starts a comment.
void load_config(std::istream& in, PipelineConfig& config);
void load_config_file(const std::filesystem::path& path, PipelineConfig& config);

// Every recognised key with its current value, one `key = value` per line.
void write_config(std::ostream& out, const PipelineConfig& config);

}  // namespace ekma
