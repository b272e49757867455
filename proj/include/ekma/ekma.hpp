#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ekma/features.hpp"
#include "ekma/forest.hpp"
#include "ekma/ingest.hpp"

namespace ekma {

// Inclusive year/month/hour window defining the baseline sample.
struct BaselineCriteria {
  int year = 2024;
  int month_first = 6;
  int month_last = 9;
  int hour_first = 12;
  int hour_last = 17;

  bool matches(const Timestamp& t) const;
  std::string describe() const;
};

struct BaselineSet {
  FeatureMatrix rows;
  std::vector<std::size_t> indices;  // into the source matrix
  BaselineCriteria criteria;
};

// Rows of `features` whose key timestamp satisfies `criteria`. Throws when none do.
BaselineSet select_baseline(const FeatureMatrix& features, const BaselineCriteria& criteria);
// Same, taking timestamps from row-aligned records.
BaselineSet select_baseline(const std::vector<HourlyRecord>& records, const FeatureMatrix& features,
                            const BaselineCriteria& criteria);

// Scales the no2 column by alpha and the co column by beta; every other
// column is left bit-identical.
FeatureMatrix perturb(const FeatureMatrix& rows, double alpha, double beta);

// Running mean of the forest's predictions over all rows, in row order.
double mean_prediction(const ForestModel& model, const FeatureMatrix& rows);

inline constexpr double kScaleMin = 0.5;
inline constexpr double kScaleMax = 1.5;

// n evenly spaced points from lo to hi inclusive, endpoints exact.
std::vector<double> uniform_grid(double lo, double hi, int n);

struct EkmaSurface {
  std::vector<double> alphas;  // NO2 scale factors
  std::vector<double> betas;   // CO scale factors
  std::vector<std::vector<double>> o3_mean;  // [alpha][beta], ppm
  std::size_t baseline_size = 0;

  double min() const;
  double max() const;
};

EkmaSurface ekma_surface(const ForestModel& model, const BaselineSet& baseline, const std::vector<double>& alphas,
                         const std::vector<double>& betas);

// 24 x |alphas| matrix: every baseline row is moved to hour h (cyclic hour
// columns overwritten) and its no2 scaled by alpha.
std::vector<std::vector<double>> hour_no2_surface(const ForestModel& model, const BaselineSet& baseline_all_hours,
                                                  const std::vector<double>& alphas);

namespace reference {

EkmaSurface ekma_surface(const ForestModel& model, const BaselineSet& baseline, const std::vector<double>& alphas,
                         const std::vector<double>& betas);

}  // namespace reference

enum class Regime { kVocLimited, kNoxLimited, kTransitional };
const char* regime_name(Regime r);

struct RegimeDiagnosis {
  Regime label = Regime::kTransitional;
  double s_nox = 0.0;  // ppm per unit alpha, from the 1.0 -> 0.5 chord
  double s_voc = 0.0;  // ppm per unit beta
  double tau = 1.25;
};

inline constexpr double kDefaultTau = 1.25;

// Applies the chord rule to given sensitivities.
Regime classify_sensitivities(double s_nox, double s_voc, double tau);
// Reads the (1,1), (0.5,1) and (1,0.5) cells; throws when any is absent.
RegimeDiagnosis classify_regime(const EkmaSurface& surface, double tau = kDefaultTau);

struct ContourPoint {
  double alpha;
  double beta;

  friend bool operator==(const ContourPoint&, const ContourPoint&) = default;
};

using Polyline = std::vector<ContourPoint>;

struct Isopleth {
  double level = 0.0;
  std::vector<Polyline> polylines;  // closed loops repeat their first vertex at the end
};

// Marching squares over the (alpha, beta) grid with linear interpolation on
// cell edges. Corners >= level count as high; a saddle cell whose corner
// average is >= level joins its high corners. Levels outside the surface
// range produce an empty isopleth and a message in `warnings` when given.
std::vector<Isopleth> extract_isopleths(const EkmaSurface& surface, const std::vector<double>& levels,
                                        std::vector<std::string>* warnings = nullptr);

// `count` levels evenly spaced strictly inside (min, max) of the surface.
std::vector<double> default_levels(const EkmaSurface& surface, int count);

void write_surface_csv(std::ostream& out, const EkmaSurface& surface);
void write_hour_surface_csv(std::ostream& out, const std::vector<double>& alphas,
                            const std::vector<std::vector<double>>& values);
void write_isopleths_csv(std::ostream& out, const std::vector<Isopleth>& isopleths);
void write_diagnosis(std::ostream& out, const RegimeDiagnosis& d, const BaselineCriteria& criteria,
                     std::size_t baseline_size);

}  // namespace ekma
