#pragma once

#include <filesystem>
#include <iosfwd>

#include "ekma/config.hpp"

namespace ekma::pipeline {

// Artifact names, relative to the output directory.
namespace files {
inline constexpr const char* kRecords = "records.csv";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kFeaturesImputed = "features_imputed.csv";
inline constexpr const char* kStandardization = "standardization.txt";
inline constexpr const char* kModel = "model.txt";
inline constexpr const char* kMetrics = "metrics.txt";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kImportance = "importance.csv";
inline constexpr const char* kMonthlyMean = "monthly_mean.csv";
inline constexpr const char* kMonthlyClimatology = "monthly_climatology.csv";
inline constexpr const char* kDiurnal = "diurnal_by_season.csv";
inline constexpr const char* kWeekdayWeekend = "weekday_weekend.csv";
inline constexpr const char* kSurface = "ekma_surface.csv";
inline constexpr const char* kHourSurface = "ekma_hour_no2.csv";
inline constexpr const char* kIsopleths = "isopleths.csv";
inline constexpr const char* kDiagnosis = "diagnosis.txt";
inline constexpr const char* kSurfaceSvg = "ekma_surface.svg";
inline constexpr const char* kHourSurfaceSvg = "ekma_hour_no2.svg";
}  // namespace files

// Each stage reads its declared inputs and writes under config.output_dir
// (fetch writes under config.data_dir). Progress lines go to `log`.
void fetch(const PipelineConfig& config, std::ostream& log);
void ingest(const PipelineConfig& config, std::ostream& log);
void synth(const PipelineConfig& config, std::ostream& log);
void features(const PipelineConfig& config, std::ostream& log);
void impute(const PipelineConfig& config, std::ostream& log);
void train(const PipelineConfig& config, std::ostream& log);
void evaluate(const PipelineConfig& config, std::ostream& log);
void importance(const PipelineConfig& config, std::ostream& log);
void climatology(const PipelineConfig& config, std::ostream& log);
void ekma(const PipelineConfig& config, std::ostream& log);

// ingest (or synth when `synthetic`), then features through ekma.
void all(const PipelineConfig& config, bool synthetic, std::ostream& log);

}  // namespace ekma::pipeline
