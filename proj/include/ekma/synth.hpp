#pragma once

#include <cstdint>
#include <vector>

#include "ekma/calendar.hpp"
#include "ekma/ekma.hpp"
#include "ekma/ingest.hpp"

namespace ekma {

// Parameters for the planted-response generator. O3 (ppm) is
//   base(hour, month) + a * g(CO / 0.45) + b * g(NO2 / 18) + noise,
// with g(u) = u / (1 + u). VOC-limited worlds use a = 0.035, b = -0.015
// (NO2 titrates ozone); NOx-limited worlds use a = 0.035 / 3, b = 0.035.
// Weekend NO2 is 25% below weekday NO2.
struct SyntheticSpec {
  int n_sites = 1;
  DateRange span{make_date(2024, 1, 1), make_date(2025, 12, 31)};
  double noise_sd = 0.0;  // ppm
  Regime regime = Regime::kVocLimited;
  std::uint64_t seed = 1;
  double pollutant_missing = 0.03;  // per-cell missing probability for NO2, CO, PM2.5
  double o3_missing = 0.01;
};

struct PlantedCoefficients {
  double a;  // CO term
  double b;  // NO2 term
};

PlantedCoefficients planted_coefficients(Regime regime);

// Records ordered by site, then time. Deterministic in `spec`.
std::vector<HourlyRecord> synth_generate(const SyntheticSpec& spec);

// Standard deviation of the noise-free O3 signal for `spec`; used to set
// noise as a fraction of signal variability.
double synth_signal_sd(const SyntheticSpec& spec);

}  // namespace ekma
