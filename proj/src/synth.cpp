#include "ekma/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ekma/error.hpp"
#include "ekma/rng.hpp"

namespace ekma {

namespace {

constexpr double kNo2Ref = 18.0;  // ppb
constexpr double kCoRef = 0.45;   // ppm
constexpr double kPm25Ref = 11.0;
constexpr double kWeekendNo2Factor = 0.75;

double saturating(double u) { return u / (1.0 + u); }

double bump(double h, double centre, double width) {
  const double z = (h - centre) / width;
  return std::exp(-z * z);
}

// Single afternoon peak scaled by season (July maximum).
double base_o3(int hour, int month) {
  const double season = std::cos(2.0 * std::numbers::pi * (month - 7) / 12.0);
  const double daylight = hour >= 6 && hour <= 20 ? std::sin(std::numbers::pi * (hour - 6) / 14.0) : 0.0;
  return 0.022 + 0.006 * season + (0.030 + 0.015 * season) * daylight;
}

double traffic(int hour) { return 0.8 + 0.5 * bump(hour, 7.5, 1.5) + 0.45 * bump(hour, 18.5, 2.0); }

double winter_factor(int month) { return 1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * (month - 1) / 12.0); }

struct Site {
  std::string key;
  double latitude;
  double longitude;
  double no2_scale;
  double co_scale;
  double pm_scale;
  double o3_offset;
};

Site make_site(const SyntheticSpec& spec, int index) {
  Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(index), 0}));
  Site s;
  s.key = "06-037-" + std::to_string(9001 + index);
  s.latitude = 34.05 + rng.uniform(-0.3, 0.3);
  s.longitude = -118.25 + rng.uniform(-0.4, 0.4);
  s.no2_scale = std::exp(0.2 * rng.normal());
  s.co_scale = std::exp(0.15 * rng.normal());
  s.pm_scale = std::exp(0.2 * rng.normal());
  s.o3_offset = 0.002 * rng.normal();
  return s;
}

void validate(const SyntheticSpec& spec) {
  if (spec.n_sites < 1) throw Error("synth: n_sites must be >= 1");
  if (spec.span.last < spec.span.first) throw Error("synth: empty date span");
  if (!(spec.noise_sd >= 0.0)) throw Error("synth: noise_sd must be >= 0");
  if (spec.regime == Regime::kTransitional) throw Error("synth: planted regime must be VOC_LIMITED or NOX_LIMITED");
  for (const double f : {spec.pollutant_missing, spec.o3_missing}) {
    if (!(f >= 0.0 && f < 1.0)) throw Error("synth: missing fractions must lie in [0, 1)");
  }
}

}  // namespace

PlantedCoefficients planted_coefficients(Regime regime) {
  switch (regime) {
    case Regime::kVocLimited: return {0.035, -0.015};
    case Regime::kNoxLimited: return {0.035 / 3.0, 0.035};
    case Regime::kTransitional: break;
  }
  throw Error("synth: no planted coefficients for TRANSITIONAL");
}

std::vector<HourlyRecord> synth_generate(const SyntheticSpec& spec) {
  validate(spec);
  const PlantedCoefficients coef = planted_coefficients(spec.regime);
  const long days = days_between(spec.span.first, spec.span.last) + 1;
  std::vector<HourlyRecord> out;
  out.reserve(static_cast<std::size_t>(spec.n_sites) * static_cast<std::size_t>(days) * 24);

  for (int s = 0; s < spec.n_sites; ++s) {
    const Site site = make_site(spec, s);
    const auto si = static_cast<std::uint64_t>(s);
    Rng precursor(derive_seed(spec.seed, {si, 1}));
    Rng noise(derive_seed(spec.seed, {si, 2}));
    Rng gaps(derive_seed(spec.seed, {si, 3}));

    for (long d = 0; d < days; ++d) {
      const Date date = add_days(spec.span.first, d);
      const int month = month_of(date);
      const double weekend = is_weekend(date) ? kWeekendNo2Factor : 1.0;
      const double day_no2 = 0.3 * precursor.normal();
      const double day_co = 0.5 * day_no2 + 0.25 * precursor.normal();
      for (int h = 0; h < 24; ++h) {
        const double no2 = kNo2Ref * site.no2_scale * traffic(h) * winter_factor(month) * weekend *
                           std::exp(day_no2 + 0.35 * precursor.normal());
        const double co = kCoRef * site.co_scale * (0.7 + 0.3 * traffic(h)) * winter_factor(month) *
                          std::exp(day_co + 0.35 * precursor.normal());
        const double pm25 = kPm25Ref * site.pm_scale * (1.0 + 0.2 * (winter_factor(month) - 1.0)) *
                            std::exp(0.4 * precursor.normal());
        const double signal = base_o3(h, month) + site.o3_offset + coef.a * saturating(co / kCoRef) +
                              coef.b * saturating(no2 / kNo2Ref);
        const double o3 = std::max(0.0, signal + spec.noise_sd * noise.normal());

        HourlyRecord r;
        r.site_key = site.key;
        r.latitude = site.latitude;
        r.longitude = site.longitude;
        r.time = Timestamp{date, h};
        // Gap draws happen unconditionally so every stream advances identically.
        const bool miss_o3 = gaps.uniform01() < spec.o3_missing;
        const bool miss_no2 = gaps.uniform01() < spec.pollutant_missing;
        const bool miss_co = gaps.uniform01() < spec.pollutant_missing;
        const bool miss_pm = gaps.uniform01() < spec.pollutant_missing;
        if (!miss_o3) r.o3 = o3;
        if (!miss_no2) r.no2 = no2;
        if (!miss_co) r.co = co;
        if (!miss_pm) r.pm25 = pm25;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

double synth_signal_sd(const SyntheticSpec& spec) {
  SyntheticSpec clean = spec;
  clean.noise_sd = 0.0;
  clean.o3_missing = 0.0;
  const auto records = synth_generate(clean);
  double sum = 0.0;
  for (const auto& r : records) sum += *r.o3;
  const double mean = sum / static_cast<double>(records.size());
  double ss = 0.0;
  for (const auto& r : records) ss += (*r.o3 - mean) * (*r.o3 - mean);
  return std::sqrt(ss / static_cast<double>(records.size()));
}

}  // namespace ekma
