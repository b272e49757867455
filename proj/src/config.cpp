#include "ekma/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

DateRange PipelineConfig::span() const {
  if (years.empty()) throw Error("config: data.years is empty");
  const auto [lo, hi] = std::minmax_element(years.begin(), years.end());
  return DateRange{make_date(*lo, 1, 1), make_date(*hi, 12, 31)};
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("config: invalid ") + what);
  };
  require(!years.empty(), "data.years");
  require(coverage_min > 0.0 && coverage_min <= 1.0, "ingest.coverage_min");
  require(knn_k >= 1, "impute.k");
  require(forest.num_trees >= 1, "forest.num_trees");
  require(forest.mtry >= 0, "forest.mtry");
  require(forest.min_node_size >= 1, "forest.min_node_size");
  require(train_year != test_year, "split years");
  require(importance_repeats >= 1, "importance.repeats");
  require(grid_points >= 2, "ekma.grid_points");
  require(baseline.month_first >= 1 && baseline.month_last <= 12 && baseline.month_first <= baseline.month_last,
          "ekma month range");
  require(baseline.hour_first >= 0 && baseline.hour_last <= 23 && baseline.hour_first <= baseline.hour_last,
          "ekma hour range");
  require(tau >= 1.0, "ekma.tau");
  require(isopleth_levels >= 0, "ekma.levels");
  require(threads >= 0, "run.threads");
  require(synth.n_sites >= 1, "synth.n_sites");
  require(synth.noise_sd >= 0.0, "synth.noise_sd");
  require(synth_noise_fraction >= 0.0, "synth.noise_fraction");
  require(!(synth.span.last < synth.span.first), "synth date span");
}

namespace {

long to_long(const std::string& key, const std::string& v) {
  const auto n = csv::parse_long(v);
  if (!n) throw Error("config: " + key + " expects an integer, got \"" + v + "\"");
  return *n;
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_long(key, v)); }

double to_double(const std::string& key, const std::string& v) {
  const auto d = csv::parse_double(v);
  if (!d) throw Error("config: " + key + " expects a number, got \"" + v + "\"");
  return *d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config: " + key + " expects a boolean, got \"" + v + "\"");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error("config: " + key + " expects an unsigned integer, got \"" + v + "\"");
  }
  return out;
}

Date to_date(const std::string& key, const std::string& v) {
  const auto d = parse_iso_date(v);
  if (!d) throw Error("config: " + key + " expects YYYY-MM-DD, got \"" + v + "\"");
  return *d;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& item : csv::split_line(v)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

Regime to_regime(const std::string& key, const std::string& v) {
  if (v == "VOC_LIMITED") return Regime::kVocLimited;
  if (v == "NOX_LIMITED") return Regime::kNoxLimited;
  throw Error("config: " + key + " expects VOC_LIMITED or NOX_LIMITED, got \"" + v + "\"");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"data.dir", {[](auto& c, auto&, auto& v) { c.data_dir = v; }, [](auto& c) { return c.data_dir.string(); }}},
      {"data.years",
       {[](auto& c, auto& k, auto& v) {
          c.years.clear();
          for (const auto& item : split_list(v)) c.years.push_back(to_int(k, item));
        },
        [](auto& c) {
          std::vector<std::string> s;
          for (int y : c.years) s.push_back(std::to_string(y));
          return join(s);
        }}},
      {"data.base_url",
       {[](auto& c, auto&, auto& v) { c.download_base_url = v; }, [](auto& c) { return c.download_base_url; }}},
      {"ingest.state", {[](auto& c, auto&, auto& v) { c.sites.state = v; }, [](auto& c) { return c.sites.state; }}},
      {"ingest.county",
       {[](auto& c, auto&, auto& v) { c.sites.county = v; }, [](auto& c) { return c.sites.county; }}},
      {"ingest.sites",
       {[](auto& c, auto&, auto& v) { c.sites.allowlist = split_list(v); },
        [](auto& c) { return join(c.sites.allowlist); }}},
      {"ingest.coverage_min",
       {[](auto& c, auto& k, auto& v) { c.coverage_min = to_double(k, v); },
        [](auto& c) { return csv::format_exact(c.coverage_min); }}},
      {"impute.k",
       {[](auto& c, auto& k, auto& v) { c.knn_k = to_int(k, v); }, [](auto& c) { return std::to_string(c.knn_k); }}},
      {"forest.num_trees",
       {[](auto& c, auto& k, auto& v) { c.forest.num_trees = to_int(k, v); },
        [](auto& c) { return std::to_string(c.forest.num_trees); }}},
      {"forest.mtry",
       {[](auto& c, auto& k, auto& v) { c.forest.mtry = to_int(k, v); },
        [](auto& c) { return std::to_string(c.forest.mtry); }}},
      {"forest.min_node_size",
       {[](auto& c, auto& k, auto& v) { c.forest.min_node_size = to_int(k, v); },
        [](auto& c) { return std::to_string(c.forest.min_node_size); }}},
      {"forest.seed",
       {[](auto& c, auto& k, auto& v) { c.forest.seed = to_u64(k, v); },
        [](auto& c) { return std::to_string(c.forest.seed); }}},
      {"split.train_year",
       {[](auto& c, auto& k, auto& v) { c.train_year = to_int(k, v); },
        [](auto& c) { return std::to_string(c.train_year); }}},
      {"split.test_year",
       {[](auto& c, auto& k, auto& v) { c.test_year = to_int(k, v); },
        [](auto& c) { return std::to_string(c.test_year); }}},
      {"importance.repeats",
       {[](auto& c, auto& k, auto& v) { c.importance_repeats = to_int(k, v); },
        [](auto& c) { return std::to_string(c.importance_repeats); }}},
      {"ekma.grid_points",
       {[](auto& c, auto& k, auto& v) { c.grid_points = to_int(k, v); },
        [](auto& c) { return std::to_string(c.grid_points); }}},
      {"ekma.year",
       {[](auto& c, auto& k, auto& v) { c.baseline.year = to_int(k, v); },
        [](auto& c) { return std::to_string(c.baseline.year); }}},
      {"ekma.month_first",
       {[](auto& c, auto& k, auto& v) { c.baseline.month_first = to_int(k, v); },
        [](auto& c) { return std::to_string(c.baseline.month_first); }}},
      {"ekma.month_last",
       {[](auto& c, auto& k, auto& v) { c.baseline.month_last = to_int(k, v); },
        [](auto& c) { return std::to_string(c.baseline.month_last); }}},
      {"ekma.hour_first",
       {[](auto& c, auto& k, auto& v) { c.baseline.hour_first = to_int(k, v); },
        [](auto& c) { return std::to_string(c.baseline.hour_first); }}},
      {"ekma.hour_last",
       {[](auto& c, auto& k, auto& v) { c.baseline.hour_last = to_int(k, v); },
        [](auto& c) { return std::to_string(c.baseline.hour_last); }}},
      {"ekma.tau",
       {[](auto& c, auto& k, auto& v) { c.tau = to_double(k, v); }, [](auto& c) { return csv::format_exact(c.tau); }}},
      {"ekma.levels",
       {[](auto& c, auto& k, auto& v) { c.isopleth_levels = to_int(k, v); },
        [](auto& c) { return std::to_string(c.isopleth_levels); }}},
      {"output.dir",
       {[](auto& c, auto&, auto& v) { c.output_dir = v; }, [](auto& c) { return c.output_dir.string(); }}},
      {"output.svg",
       {[](auto& c, auto& k, auto& v) { c.svg = to_bool(k, v); },
        [](auto& c) { return std::string(c.svg ? "true" : "false"); }}},
      {"run.threads",
       {[](auto& c, auto& k, auto& v) { c.threads = to_int(k, v); }, [](auto& c) { return std::to_string(c.threads); }}},
      {"synth.n_sites",
       {[](auto& c, auto& k, auto& v) { c.synth.n_sites = to_int(k, v); },
        [](auto& c) { return std::to_string(c.synth.n_sites); }}},
      {"synth.start",
       {[](auto& c, auto& k, auto& v) { c.synth.span.first = to_date(k, v); },
        [](auto& c) { return format_iso_date(c.synth.span.first); }}},
      {"synth.end",
       {[](auto& c, auto& k, auto& v) { c.synth.span.last = to_date(k, v); },
        [](auto& c) { return format_iso_date(c.synth.span.last); }}},
      {"synth.noise_sd",
       {[](auto& c, auto& k, auto& v) { c.synth.noise_sd = to_double(k, v); },
        [](auto& c) { return csv::format_exact(c.synth.noise_sd); }}},
      {"synth.noise_fraction",
       {[](auto& c, auto& k, auto& v) { c.synth_noise_fraction = to_double(k, v); },
        [](auto& c) { return csv::format_exact(c.synth_noise_fraction); }}},
      {"synth.regime",
       {[](auto& c, auto& k, auto& v) { c.synth.regime = to_regime(k, v); },
        [](auto& c) { return std::string(regime_name(c.synth.regime)); }}},
      {"synth.seed",
       {[](auto& c, auto& k, auto& v) { c.synth.seed = to_u64(k, v); },
        [](auto& c) { return std::to_string(c.synth.seed); }}},
      {"synth.pollutant_missing",
       {[](auto& c, auto& k, auto& v) { c.synth.pollutant_missing = to_double(k, v); },
        [](auto& c) { return csv::format_exact(c.synth.pollutant_missing); }}},
      {"synth.o3_missing",
       {[](auto& c, auto& k, auto& v) { c.synth.o3_missing = to_double(k, v); },
        [](auto& c) { return csv::format_exact(c.synth.o3_missing); }}},
  };
  return table;
}

}  // namespace

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw Error("config: unknown key \"" + key + "\"");
  it->second.set(config, key, value);
}

void load_config(std::istream& in, PipelineConfig& config) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(line_no) + ": expected `section.key = value`");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      throw Error("config line " + std::to_string(line_no) + ": key \"" + key + "\" lacks a section");
    }
    apply_setting(config, key, trim(line.substr(eq + 1)));
  }
}

void load_config_file(const std::filesystem::path& path, PipelineConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  load_config(in, config);
}

void write_config(std::ostream& out, const PipelineConfig& config) {
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(config) << '\n';
}

}  // namespace ekma
