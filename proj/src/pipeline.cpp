#include "ekma/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "ekma/climatology.hpp"
#include "ekma/csv.hpp"
#include "ekma/download.hpp"
#include "ekma/ekma.hpp"
#include "ekma/error.hpp"
#include "ekma/eval.hpp"
#include "ekma/features.hpp"
#include "ekma/forest.hpp"
#include "ekma/impute.hpp"
#include "ekma/ingest.hpp"
#include "ekma/svg.hpp"
#include "ekma/synth.hpp"

namespace ekma::pipeline {

namespace fs = std::filesystem;

namespace {

fs::path out_path(const PipelineConfig& c, const char* name) { return c.output_dir / name; }

std::ifstream open_input(const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw Error("missing input " + path.string() + " (produced by `" + producer + "`)");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

template <class Writer>
void write_output(const PipelineConfig& c, const char* name, Writer&& writer) {
  fs::create_directories(c.output_dir);
  const fs::path path = out_path(c, name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  writer(out);
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<HourlyRecord> load_records(const PipelineConfig& c) {
  auto in = open_input(out_path(c, files::kRecords), "ingest or synth");
  return read_records_csv(in);
}

FeatureMatrix load_imputed(const PipelineConfig& c) {
  auto in = open_input(out_path(c, files::kFeaturesImputed), "impute");
  return read_features_csv(in);
}

ForestModel load_trained(const PipelineConfig& c) {
  auto in = open_input(out_path(c, files::kModel), "train");
  return load_model(in);
}

FeatureMatrix rows_of_year(const FeatureMatrix& m, int year) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (year_of(m.keys()[r].time.date) == year) rows.push_back(r);
  }
  if (rows.empty()) throw Error("no imputed rows for year " + std::to_string(year));
  return m.select_rows(rows);
}

void write_records(const PipelineConfig& c, const std::vector<HourlyRecord>& records) {
  write_output(c, files::kRecords, [&](std::ostream& out) { write_records_csv(out, records); });
}

}  // namespace

void fetch(const PipelineConfig& c, std::ostream& log) {
  DownloadOptions options;
  options.base_url = c.download_base_url;
  for (const int year : c.years) {
    for (const Pollutant p : kAllPollutants) {
      const int code = static_cast<int>(p);
      for (int attempt = 1;; ++attempt) {
        try {
          const fs::path path = download_airdata(code, year, c.data_dir, options);
          log << "[fetch] " << path.string() << '\n';
          break;
        } catch (const HttpError& e) {
          if (!e.retryable() || attempt == 3) throw;
          log << "[fetch] " << e.what() << "; retrying\n";
          std::this_thread::sleep_for(std::chrono::seconds(2 * attempt));
        }
      }
    }
  }
}

void ingest(const PipelineConfig& c, std::ostream& log) {
  std::vector<RawObservation> observations;
  for (const int year : c.years) {
    for (const Pollutant p : kAllPollutants) {
      const fs::path path = c.data_dir / ("hourly_" + std::to_string(static_cast<int>(p)) + "_" +
                                          std::to_string(year) + ".csv");
      auto in = open_input(path, "fetch");
      auto parsed = parse_hourly_csv(in, p, c.sites);
      log << "[ingest] " << path.filename().string() << ": " << parsed.observations.size() << " rows, "
          << parsed.skipped << " skipped\n";
      observations.insert(observations.end(), std::make_move_iterator(parsed.observations.begin()),
                          std::make_move_iterator(parsed.observations.end()));
    }
  }
  const auto clean = apply_qc(observations);
  std::vector<std::string> warnings;
  const auto pivoted = pivot_records(clean, &warnings);
  for (const auto& w : warnings) log << "[ingest] warning: " << w << '\n';
  const auto kept = filter_coverage(pivoted, c.coverage_min, c.span());
  log << "[ingest] " << clean.size() << " observations after QC, " << pivoted.size() << " site-hours, "
      << kept.size() << " after coverage filter\n";
  write_records(c, kept);
}

void synth(const PipelineConfig& c, std::ostream& log) {
  SyntheticSpec spec = c.synth;
  if (c.synth_noise_fraction > 0.0) spec.noise_sd = c.synth_noise_fraction * synth_signal_sd(spec);
  const auto records = synth_generate(spec);
  log << "[synth] " << records.size() << " records, regime " << regime_name(spec.regime) << ", noise_sd "
      << spec.noise_sd << " ppm\n";
  write_records(c, records);
}

void features(const PipelineConfig& c, std::ostream& log) {
  const auto m = build_features(load_records(c));
  log << "[features] " << m.rows() << " rows x " << m.cols() << " predictors\n";
  write_output(c, files::kFeatures, [&](std::ostream& out) { write_features_csv(out, m); });
}

void impute(const PipelineConfig& c, std::ostream& log) {
  auto in = open_input(out_path(c, files::kFeatures), "features");
  const FeatureMatrix all = read_features_csv(in);

  // The target is never imputed: rows without O3 leave the modelling set.
  std::vector<std::size_t> with_target;
  for (std::size_t r = 0; r < all.rows(); ++r) {
    if (!is_missing(all.target()[r])) with_target.push_back(r);
  }
  const auto split = temporal_split(all.select_rows(with_target), c.train_year, c.test_year);
  log << "[impute] dropped " << all.rows() - with_target.size() << " rows without O3, " << split.discarded
      << " outside " << c.train_year << "/" << c.test_year << '\n';

  const auto stats = compute_standardization(split.train);
  const FeatureMatrix pool = impute_training_pool(split.train, stats, c.knn_k);
  const FeatureMatrix test = knn_impute(split.test, pool, stats, c.knn_k);

  std::vector<std::size_t> order(pool.rows() + test.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  FeatureMatrix combined(pool.column_names(), order.size());
  for (std::size_t r = 0; r < pool.rows(); ++r) {
    std::copy(pool.row(r).begin(), pool.row(r).end(), combined.row(r).begin());
  }
  for (std::size_t r = 0; r < test.rows(); ++r) {
    std::copy(test.row(r).begin(), test.row(r).end(), combined.row(pool.rows() + r).begin());
  }
  combined.keys() = pool.keys();
  combined.keys().insert(combined.keys().end(), test.keys().begin(), test.keys().end());
  combined.target() = pool.target();
  combined.target().insert(combined.target().end(), test.target().begin(), test.target().end());

  log << "[impute] train " << pool.rows() << " rows, test " << test.rows() << " rows, k=" << c.knn_k << '\n';
  write_output(c, files::kFeaturesImputed, [&](std::ostream& out) { write_features_csv(out, combined); });
  write_output(c, files::kStandardization, [&](std::ostream& out) { write_standardization(out, stats); });
}

void train(const PipelineConfig& c, std::ostream& log) {
  const FeatureMatrix x = rows_of_year(load_imputed(c), c.train_year);
  const auto model = train_forest(x, x.target(), c.forest);
  log << "[train] " << model.trees.size() << " trees, mtry=" << model.params.mtry << ", "
      << x.rows() << " rows\n";
  write_output(c, files::kModel, [&](std::ostream& out) { save_model(out, model); });
}

void evaluate(const PipelineConfig& c, std::ostream& log) {
  const auto model = load_trained(c);
  const FeatureMatrix x = rows_of_year(load_imputed(c), c.test_year);
  const auto pred = predict(model, x);
  const Metrics m = compute_metrics(x.target(), pred);
  log << "[evaluate] r2=" << m.r2 << " rmse=" << m.rmse << " n_test=" << m.n_test << '\n';
  if (std::isnan(m.r2)) log << "[evaluate] warning: observed O3 is constant over the test year; r2 undefined\n";
  write_output(c, files::kMetrics, [&](std::ostream& out) { write_metrics(out, m); });
  write_output(c, files::kPredictions, [&](std::ostream& out) {
    out << "site_key,date_local,hour_local,o3_observed,o3_predicted\n";
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto& k = x.keys()[r];
      out << k.site_key << ',' << format_iso_date(k.time.date) << ',' << k.time.hour << ','
          << csv::format_exact(x.target()[r]) << ',' << csv::format_exact(pred[r]) << '\n';
    }
  });
}

void importance(const PipelineConfig& c, std::ostream& log) {
  const auto model = load_trained(c);
  const FeatureMatrix x = rows_of_year(load_imputed(c), c.test_year);
  const auto entries = permutation_importance(model, x, x.target(), c.importance_repeats, c.forest.seed);
  log << "[importance] top feature " << entries.front().feature << " (+" << entries.front().delta_rmse
      << " ppm RMSE)\n";
  write_output(c, files::kImportance, [&](std::ostream& out) { write_importance_csv(out, entries); });
}

void climatology(const PipelineConfig& c, std::ostream& log) {
  const auto records = load_records(c);
  const auto series = monthly_mean_series(records);
  const auto clim = monthly_climatology(records);
  const auto diurnal = diurnal_cycle_by_season(records);
  const auto week = weekday_weekend_cycle(records);
  write_output(c, files::kMonthlyMean, [&](std::ostream& out) { write_monthly_mean_csv(out, series); });
  write_output(c, files::kMonthlyClimatology, [&](std::ostream& out) { write_monthly_climatology_csv(out, clim); });
  write_output(c, files::kDiurnal, [&](std::ostream& out) { write_diurnal_csv(out, diurnal); });
  write_output(c, files::kWeekdayWeekend, [&](std::ostream& out) { write_weekday_weekend_csv(out, week); });

  if (c.svg) {
    svg::Series monthly{"monthly mean", {}};
    for (std::size_t i = 0; i < series.size(); ++i) {
      monthly.points.emplace_back(series[i].year + (series[i].month - 1) / 12.0, series[i].mean);
    }
    svg::Series mean{"mean", {}}, q25{"q25", {}}, q75{"q75", {}};
    for (const auto& p : clim) {
      mean.points.emplace_back(p.bin, p.mean);
      q25.points.emplace_back(p.bin, p.q25);
      q75.points.emplace_back(p.bin, p.q75);
    }
    std::vector<svg::Series> seasons;
    for (const auto& [season, cycle] : diurnal) {
      svg::Series s{season_name(season), {}};
      for (const auto& p : cycle) {
        if (p) s.points.emplace_back(p->bin, p->mean);
      }
      seasons.push_back(std::move(s));
    }
    svg::Series weekday{"weekday", {}}, weekend{"weekend", {}};
    for (std::size_t h = 0; h < 24; ++h) {
      if (week.weekday[h]) weekday.points.emplace_back(h, *week.weekday[h]);
      if (week.weekend[h]) weekend.points.emplace_back(h, *week.weekend[h]);
    }
    fs::create_directories(c.output_dir);
    svg::write_file(out_path(c, "monthly_mean.svg"),
                    svg::line_chart("Monthly mean O3", "year", "O3 (ppm)", {monthly}));
    svg::write_file(out_path(c, "monthly_climatology.svg"),
                    svg::line_chart("Monthly climatology of O3", "month", "O3 (ppm)", {mean, q25, q75}));
    svg::write_file(out_path(c, "diurnal_by_season.svg"),
                    svg::line_chart("Diurnal O3 cycle by season", "local hour", "O3 (ppm)", seasons));
    svg::write_file(out_path(c, "weekday_weekend.svg"),
                    svg::line_chart("Weekday vs weekend diurnal O3", "local hour", "O3 (ppm)", {weekday, weekend}));
  }
  log << "[climatology] " << series.size() << " months\n";
}

void ekma(const PipelineConfig& c, std::ostream& log) {
  const auto model = load_trained(c);
  const FeatureMatrix imputed = load_imputed(c);
  const BaselineSet baseline = select_baseline(imputed, c.baseline);
  const auto grid = uniform_grid(kScaleMin, kScaleMax, c.grid_points);
  const EkmaSurface surface = ekma_surface(model, baseline, grid, grid);
  const RegimeDiagnosis diagnosis = classify_regime(surface, c.tau);

  BaselineCriteria all_hours = c.baseline;
  all_hours.hour_first = 0;
  all_hours.hour_last = 23;
  const auto hour_surface = hour_no2_surface(model, select_baseline(imputed, all_hours), grid);

  std::vector<std::string> warnings;
  const auto isopleths = extract_isopleths(surface, default_levels(surface, c.isopleth_levels), &warnings);
  for (const auto& w : warnings) log << "[ekma] warning: " << w << '\n';

  write_output(c, files::kSurface, [&](std::ostream& out) { write_surface_csv(out, surface); });
  write_output(c, files::kHourSurface, [&](std::ostream& out) { write_hour_surface_csv(out, grid, hour_surface); });
  write_output(c, files::kIsopleths, [&](std::ostream& out) { write_isopleths_csv(out, isopleths); });
  write_output(c, files::kDiagnosis,
               [&](std::ostream& out) { write_diagnosis(out, diagnosis, c.baseline, surface.baseline_size); });
  if (c.svg) {
    svg::render_heatmap(surface, isopleths, out_path(c, files::kSurfaceSvg));
    std::vector<double> hours(24);
    for (std::size_t h = 0; h < 24; ++h) hours[h] = static_cast<double>(h);
    svg::HeatmapLabels labels{"Surrogate O3 by local hour and NO2 scale (ppm)", "local hour", "alpha (NO2 scale)"};
    svg::write_file(out_path(c, files::kHourSurfaceSvg), svg::heatmap(hours, grid, hour_surface, {}, labels));
  }
  log << "[ekma] baseline " << surface.baseline_size << " rows; label " << regime_name(diagnosis.label)
      << " (s_nox=" << diagnosis.s_nox << ", s_voc=" << diagnosis.s_voc << ")\n";
}

void all(const PipelineConfig& c, bool synthetic, std::ostream& log) {
  if (synthetic) {
    synth(c, log);
  } else {
    ingest(c, log);
  }
  features(c, log);
  impute(c, log);
  train(c, log);
  evaluate(c, log);
  importance(c, log);
  climatology(c, log);
  ekma(c, log);
}

}  // namespace ekma::pipeline
