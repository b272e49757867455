#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ekma/ekma.hpp"

namespace ekma::svg {

// Colour for t in [0, 1]: straight RGB interpolation from #440154 (low) to
// #fde725 (high).
std::string ramp_colour(double t);

struct HeatmapLabels {
  std::string title = "Surrogate EKMA response (mean O3, ppm)";
  std::string x_label = "alpha (NO2 scale)";
  std::string y_label = "beta (CO scale)";
};

// Grid cells coloured over [min, max] of the values, white isopleth
// polylines, axes and a colour legend. Byte-deterministic.
std::string heatmap(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<std::vector<double>>& values, const std::vector<Isopleth>& isopleths,
                    const HeatmapLabels& labels);

std::string ekma_heatmap(const EkmaSurface& surface, const std::vector<Isopleth>& isopleths);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

// Writes `content` to `dest`; throws when the file cannot be written.
void write_file(const std::filesystem::path& dest, const std::string& content);

// Writes the EKMA heatmap to `dest`.
void render_heatmap(const EkmaSurface& surface, const std::vector<Isopleth>& isopleths,
                    const std::filesystem::path& dest);

}  // namespace ekma::svg
