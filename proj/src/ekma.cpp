#include "ekma/ekma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>

#include "ekma/csv.hpp"
#include "ekma/error.hpp"

namespace ekma {

bool BaselineCriteria::matches(const Timestamp& t) const {
  const int m = month_of(t.date);
  return year_of(t.date) == year && m >= month_first && m <= month_last && t.hour >= hour_first &&
         t.hour <= hour_last;
}

std::string BaselineCriteria::describe() const {
  return "year=" + std::to_string(year) + " months=" + std::to_string(month_first) + "-" +
         std::to_string(month_last) + " hours=" + std::to_string(hour_first) + "-" + std::to_string(hour_last);
}

namespace {

BaselineSet select_by(const FeatureMatrix& features, const BaselineCriteria& criteria,
                      const std::vector<Timestamp>& times) {
  BaselineSet set;
  set.criteria = criteria;
  for (std::size_t r = 0; r < times.size(); ++r) {
    if (criteria.matches(times[r])) set.indices.push_back(r);
  }
  if (set.indices.empty()) throw Error("select_baseline: no rows match " + criteria.describe());
  set.rows = features.select_rows(set.indices);
  return set;
}

std::size_t column_index(const FeatureMatrix& m, std::string_view name) {
  const auto& names = m.column_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("ekma: matrix has no \"" + std::string(name) + "\" column");
  return static_cast<std::size_t>(it - names.begin());
}

void check_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw Error(std::string("ekma: empty ") + what + " grid");
  for (const double v : grid) {
    if (!(v >= kScaleMin && v <= kScaleMax)) {
      throw Error(std::string("ekma: ") + what + " value " + csv::format_exact(v) + " outside [0.5, 1.5]");
    }
  }
}

EkmaSurface empty_surface(const BaselineSet& baseline, const std::vector<double>& alphas,
                          const std::vector<double>& betas) {
  check_grid(alphas, "alpha");
  check_grid(betas, "beta");
  EkmaSurface s;
  s.alphas = alphas;
  s.betas = betas;
  s.o3_mean.assign(alphas.size(), std::vector<double>(betas.size(), 0.0));
  s.baseline_size = baseline.rows.rows();
  return s;
}

double running_mean(const std::vector<double>& values) {
  double mean = 0.0;
  double count = 0.0;
  for (const double v : values) {
    count += 1.0;
    mean += (v - mean) / count;
  }
  return mean;
}

}  // namespace

BaselineSet select_baseline(const FeatureMatrix& features, const BaselineCriteria& criteria) {
  if (features.keys().size() != features.rows()) throw Error("select_baseline: matrix has no row keys");
  std::vector<Timestamp> times;
  for (const auto& k : features.keys()) times.push_back(k.time);
  return select_by(features, criteria, times);
}

BaselineSet select_baseline(const std::vector<HourlyRecord>& records, const FeatureMatrix& features,
                            const BaselineCriteria& criteria) {
  if (records.size() != features.rows()) throw Error("select_baseline: records and features are not row-aligned");
  std::vector<Timestamp> times;
  for (const auto& r : records) times.push_back(r.time);
  return select_by(features, criteria, times);
}

FeatureMatrix perturb(const FeatureMatrix& rows, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("perturb: scale factors must be positive");
  const std::size_t no2 = column_index(rows, "no2");
  const std::size_t co = column_index(rows, "co");
  FeatureMatrix out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    out.at(r, no2) *= alpha;
    out.at(r, co) *= beta;
  }
  return out;
}

double mean_prediction(const ForestModel& model, const FeatureMatrix& rows) {
  return running_mean(predict(model, rows));
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1) throw Error("uniform_grid: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(n));
  const double steps = n - 1;
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = (lo * (steps - i) + hi * i) / steps;
  return g;
}

double EkmaSurface::min() const {
  double m = o3_mean.at(0).at(0);
  for (const auto& row : o3_mean) m = std::min(m, *std::min_element(row.begin(), row.end()));
  return m;
}

double EkmaSurface::max() const {
  double m = o3_mean.at(0).at(0);
  for (const auto& row : o3_mean) m = std::max(m, *std::max_element(row.begin(), row.end()));
  return m;
}

EkmaSurface ekma_surface(const ForestModel& model, const BaselineSet& baseline, const std::vector<double>& alphas,
                         const std::vector<double>& betas) {
  EkmaSurface s = empty_surface(baseline, alphas, betas);
  const auto nb = static_cast<std::ptrdiff_t>(betas.size());
  const auto cells = static_cast<std::ptrdiff_t>(alphas.size()) * nb;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
    const auto i = static_cast<std::size_t>(cell / nb);
    const auto j = static_cast<std::size_t>(cell % nb);
    s.o3_mean[i][j] = mean_prediction(model, perturb(baseline.rows, alphas[i], betas[j]));
  }
  return s;
}

namespace reference {

EkmaSurface ekma_surface(const ForestModel& model, const BaselineSet& baseline, const std::vector<double>& alphas,
                         const std::vector<double>& betas) {
  EkmaSurface s = empty_surface(baseline, alphas, betas);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    for (std::size_t j = 0; j < betas.size(); ++j) {
      s.o3_mean[i][j] = running_mean(reference::predict(model, perturb(baseline.rows, alphas[i], betas[j])));
    }
  }
  return s;
}

}  // namespace reference

std::vector<std::vector<double>> hour_no2_surface(const ForestModel& model, const BaselineSet& baseline_all_hours,
                                                  const std::vector<double>& alphas) {
  check_grid(alphas, "alpha");
  const FeatureMatrix& base = baseline_all_hours.rows;
  const std::size_t hour_sin = column_index(base, "hour_sin");
  const std::size_t hour_cos = column_index(base, "hour_cos");
  std::vector<std::vector<double>> out(24, std::vector<double>(alphas.size(), 0.0));
  const auto na = static_cast<std::ptrdiff_t>(alphas.size());
  const auto cells = 24 * na;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
    const auto h = static_cast<std::size_t>(cell / na);
    const auto a = static_cast<std::size_t>(cell % na);
    FeatureMatrix rows = perturb(base, alphas[a], 1.0);
    const auto enc = encode_cyclic(static_cast<int>(h), 24);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      rows.at(r, hour_sin) = enc.sin_component;
      rows.at(r, hour_cos) = enc.cos_component;
    }
    out[h][a] = mean_prediction(model, rows);
  }
  return out;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kVocLimited: return "VOC_LIMITED";
    case Regime::kNoxLimited: return "NOX_LIMITED";
    case Regime::kTransitional: return "TRANSITIONAL";
  }
  return "";
}

Regime classify_sensitivities(double s_nox, double s_voc, double tau) {
  if (s_nox < 0.0) return Regime::kVocLimited;
  if (s_voc > tau * s_nox) return Regime::kVocLimited;
  if (s_nox > tau * s_voc) return Regime::kNoxLimited;
  return Regime::kTransitional;
}

namespace {

std::optional<std::size_t> find_level(const std::vector<double>& grid, double value) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - value) <= 1e-9) return i;
  }
  return std::nullopt;
}

}  // namespace

RegimeDiagnosis classify_regime(const EkmaSurface& surface, double tau) {
  const auto a1 = find_level(surface.alphas, 1.0);
  const auto a05 = find_level(surface.alphas, 0.5);
  const auto b1 = find_level(surface.betas, 1.0);
  const auto b05 = find_level(surface.betas, 0.5);
  if (!a1 || !a05 || !b1 || !b05) {
    throw Error("classify_regime: grid must contain alpha and beta values 0.5 and 1.0");
  }
  const double center = surface.o3_mean[*a1][*b1];
  RegimeDiagnosis d;
  d.tau = tau;
  d.s_nox = (center - surface.o3_mean[*a05][*b1]) / 0.5;
  d.s_voc = (center - surface.o3_mean[*a1][*b05]) / 0.5;
  d.label = classify_sensitivities(d.s_nox, d.s_voc, tau);
  return d;
}

namespace {

// Grid edge identified by its lower corner and direction: horizontal edges
// run along alpha from (i, j) to (i+1, j), vertical ones along beta from
// (i, j) to (i, j+1).
struct EdgeKey {
  int vertical;
  std::size_t i;
  std::size_t j;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

std::vector<Polyline> contour_level(const EkmaSurface& s, double level) {
  const auto& v = s.o3_mean;
  const std::size_t na = s.alphas.size();
  const std::size_t nb = s.betas.size();
  auto high = [&](std::size_t i, std::size_t j) { return v[i][j] >= level; };

  std::map<EdgeKey, ContourPoint> points;
  auto crossing = [&](const EdgeKey& e) {
    auto it = points.find(e);
    if (it != points.end()) return e;
    const std::size_t i2 = e.vertical ? e.i : e.i + 1;
    const std::size_t j2 = e.vertical ? e.j + 1 : e.j;
    const double v1 = v[e.i][e.j];
    const double v2 = v[i2][j2];
    const double t = (level - v1) / (v2 - v1);
    const double a = s.alphas[e.i] + t * (s.alphas[i2] - s.alphas[e.i]);
    const double b = s.betas[e.j] + t * (s.betas[j2] - s.betas[e.j]);
    points.emplace(e, ContourPoint{a, b});
    return e;
  };

  std::map<EdgeKey, std::vector<EdgeKey>> links;
  auto link = [&](const EdgeKey& a, const EdgeKey& b) {
    links[crossing(a)].push_back(b);
    links[crossing(b)].push_back(a);
  };

  for (std::size_t i = 0; i + 1 < na; ++i) {
    for (std::size_t j = 0; j + 1 < nb; ++j) {
      // Corners counter-clockwise from (i, j); edge k joins corner k and k+1.
      const std::array<bool, 4> h = {high(i, j), high(i + 1, j), high(i + 1, j + 1), high(i, j + 1)};
      const std::array<EdgeKey, 4> edges = {EdgeKey{0, i, j}, EdgeKey{1, i + 1, j}, EdgeKey{0, i, j + 1},
                                            EdgeKey{1, i, j}};
      std::vector<int> cut;
      for (int k = 0; k < 4; ++k) {
        if (h[static_cast<std::size_t>(k)] != h[static_cast<std::size_t>((k + 1) % 4)]) cut.push_back(k);
      }
      if (cut.size() == 2) {
        link(edges[static_cast<std::size_t>(cut[0])], edges[static_cast<std::size_t>(cut[1])]);
      } else if (cut.size() == 4) {
        const double center = (v[i][j] + v[i + 1][j] + v[i + 1][j + 1] + v[i][j + 1]) / 4.0;
        // Isolate the corners on the side the centre does not belong to.
        const bool isolate_high = center < level;
        for (std::size_t k = 0; k < 4; ++k) {
          if (h[k] == isolate_high) link(edges[(k + 3) % 4], edges[k]);
        }
      }
    }
  }

  std::vector<Polyline> lines;
  std::map<EdgeKey, bool> visited;
  auto walk = [&](EdgeKey start) {
    Polyline line;
    EdgeKey prev = start;
    EdgeKey cur = start;
    bool first = true;
    while (true) {
      visited[cur] = true;
      const ContourPoint& p = points.at(cur);
      if (line.empty() || !(line.back() == p)) line.push_back(p);
      const auto& next = links.at(cur);
      std::optional<EdgeKey> step;
      for (const auto& n : next) {
        if ((first || !(n == prev)) && !visited[n]) {
          step = n;
          break;
        }
      }
      if (!step) {
        // Close loops back onto the start vertex.
        if (links.at(start).size() == 2 && std::find(next.begin(), next.end(), start) != next.end() &&
            !(cur == start) && !first) {
          const ContourPoint& s0 = points.at(start);
          if (!(line.back() == s0)) line.push_back(s0);
        }
        break;
      }
      first = false;
      prev = cur;
      cur = *step;
    }
    if (line.size() >= 2) lines.push_back(std::move(line));
  };

  for (const auto& [key, nbrs] : links) {
    if (nbrs.size() == 1 && !visited[key]) walk(key);
  }
  for (const auto& [key, nbrs] : links) {
    if (!visited[key]) walk(key);
  }
  return lines;
}

}  // namespace

std::vector<Isopleth> extract_isopleths(const EkmaSurface& surface, const std::vector<double>& levels,
                                        std::vector<std::string>* warnings) {
  std::vector<Isopleth> out;
  const double lo = surface.min();
  const double hi = surface.max();
  for (const double level : levels) {
    Isopleth iso;
    iso.level = level;
    if (level < lo || level > hi) {
      if (warnings) warnings->push_back("isopleth level " + csv::format_sig(level) + " outside surface range");
    } else {
      iso.polylines = contour_level(surface, level);
    }
    out.push_back(std::move(iso));
  }
  return out;
}

std::vector<double> default_levels(const EkmaSurface& surface, int count) {
  const double lo = surface.min();
  const double hi = surface.max();
  std::vector<double> levels;
  if (!(hi > lo)) return levels;
  for (int i = 1; i <= count; ++i) levels.push_back(lo + (hi - lo) * i / (count + 1));
  return levels;
}

void write_surface_csv(std::ostream& out, const EkmaSurface& s) {
  out << "alpha,beta,o3_mean_ppm\n";
  for (std::size_t i = 0; i < s.alphas.size(); ++i) {
    for (std::size_t j = 0; j < s.betas.size(); ++j) {
      out << csv::format_sig(s.alphas[i]) << ',' << csv::format_sig(s.betas[j]) << ','
          << csv::format_sig(s.o3_mean[i][j]) << '\n';
    }
  }
}

void write_hour_surface_csv(std::ostream& out, const std::vector<double>& alphas,
                            const std::vector<std::vector<double>>& values) {
  out << "hour,alpha,o3_mean_ppm\n";
  for (std::size_t h = 0; h < values.size(); ++h) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      out << h << ',' << csv::format_sig(alphas[a]) << ',' << csv::format_sig(values[h][a]) << '\n';
    }
  }
}

void write_isopleths_csv(std::ostream& out, const std::vector<Isopleth>& isopleths) {
  out << "level,polyline_id,vertex_index,alpha,beta\n";
  for (const auto& iso : isopleths) {
    for (std::size_t p = 0; p < iso.polylines.size(); ++p) {
      const auto& line = iso.polylines[p];
      for (std::size_t k = 0; k < line.size(); ++k) {
        out << csv::format_sig(iso.level) << ',' << p << ',' << k << ',' << csv::format_sig(line[k].alpha, 10) << ','
            << csv::format_sig(line[k].beta, 10) << '\n';
      }
    }
  }
}

void write_diagnosis(std::ostream& out, const RegimeDiagnosis& d, const BaselineCriteria& c,
                     std::size_t baseline_size) {
  out << "label = " << regime_name(d.label) << '\n';
  out << "s_nox = " << csv::format_exact(d.s_nox) << '\n';
  out << "s_voc = " << csv::format_exact(d.s_voc) << '\n';
  out << "tau = " << csv::format_exact(d.tau) << '\n';
  out << "baseline_year = " << c.year << '\n';
  out << "baseline_months = " << c.month_first << '-' << c.month_last << '\n';
  out << "baseline_hours = " << c.hour_first << '-' << c.hour_last << '\n';
  out << "baseline_size = " << baseline_size << '\n';
}

}  // namespace ekma
