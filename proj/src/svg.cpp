#include "ekma/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ekma/error.hpp"

namespace ekma::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 110;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(title) << "</text>\n";
}

void axis_labels(std::ostringstream& out, const std::string& x_label, const std::string& y_label) {
  const double plot_mid_x = kLeft + (kWidth - kLeft - kRight) / 2;
  const double plot_mid_y = kTop + (kHeight - kTop - kBottom) / 2;
  out << "<text x=\"" << num(plot_mid_x) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num(plot_mid_y) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(plot_mid_y) << ")\">" << escape_xml(y_label) << "</text>\n";
}

// Maps data coordinates onto the plot rectangle.
struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return x1 > x0 ? kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight) : kLeft;
  }
  double py(double y) const {
    return y1 > y0 ? kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom) : kHeight - kBottom;
  }
};

void ticks(std::ostringstream& out, const Frame& f, const std::vector<double>& xt, const std::vector<double>& yt) {
  const double base = kHeight - kBottom;
  out << "<g stroke=\"black\" fill=\"none\">\n";
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
      << "\" height=\"" << num(kHeight - kTop - kBottom) << "\"/>\n";
  out << "</g>\n<g font-size=\"10\">\n";
  for (const double x : xt) {
    out << "<line x1=\"" << num(f.px(x)) << "\" y1=\"" << num(base) << "\" x2=\"" << num(f.px(x)) << "\" y2=\""
        << num(base + 4) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(base + 16) << "\" text-anchor=\"middle\">"
        << label_num(x) << "</text>\n";
  }
  for (const double y : yt) {
    out << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(f.py(y)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(f.py(y)) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(f.py(y) + 3) << "\" text-anchor=\"end\">"
        << label_num(y) << "</text>\n";
  }
  out << "</g>\n";
}

std::vector<double> even_ticks(double lo, double hi, int n) {
  std::vector<double> t;
  if (!(hi > lo)) return {lo};
  for (int i = 0; i < n; ++i) t.push_back(lo + (hi - lo) * i / (n - 1));
  return t;
}

// Cell edges halfway between grid points, extended by half a step at the ends.
std::vector<double> cell_edges(const std::vector<double>& g) {
  std::vector<double> e(g.size() + 1);
  if (g.size() == 1) {
    e[0] = g[0] - 0.5;
    e[1] = g[0] + 0.5;
    return e;
  }
  for (std::size_t i = 1; i < g.size(); ++i) e[i] = 0.5 * (g[i - 1] + g[i]);
  e.front() = g.front() - (e[1] - g.front());
  e.back() = g.back() + (g.back() - e[g.size() - 1]);
  return e;
}

}  // namespace

std::string ramp_colour(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  constexpr int lo[3] = {0x44, 0x01, 0x54};
  constexpr int hi[3] = {0xfd, 0xe7, 0x25};
  char buf[8];
  int c[3];
  for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(lo[k] + t * (hi[k] - lo[k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string heatmap(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<std::vector<double>>& values, const std::vector<Isopleth>& isopleths,
                    const HeatmapLabels& labels) {
  if (xs.empty() || ys.empty() || values.size() != xs.size()) throw Error("svg heatmap: inconsistent grid");
  double vmin = values[0][0];
  double vmax = values[0][0];
  for (const auto& row : values) {
    if (row.size() != ys.size()) throw Error("svg heatmap: inconsistent grid");
    vmin = std::min(vmin, *std::min_element(row.begin(), row.end()));
    vmax = std::max(vmax, *std::max_element(row.begin(), row.end()));
  }
  const auto xe = cell_edges(xs);
  const auto ye = cell_edges(ys);
  const Frame f{xe.front(), xe.back(), ye.front(), ye.back()};

  std::ostringstream out;
  open_svg(out, labels.title);
  out << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double t = vmax > vmin ? (values[i][j] - vmin) / (vmax - vmin) : 0.0;
      const double x = f.px(xe[i]);
      const double y = f.py(ye[j + 1]);
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(f.px(xe[i + 1]) - x)
          << "\" height=\"" << num(f.py(ye[j]) - y) << "\" fill=\"" << ramp_colour(t) << "\"/>\n";
    }
  }
  out << "</g>\n<g fill=\"none\" stroke=\"white\" stroke-width=\"1.5\">\n";
  for (const auto& iso : isopleths) {
    for (const auto& line : iso.polylines) {
      out << "<polyline points=\"";
      for (std::size_t k = 0; k < line.size(); ++k) {
        out << (k ? " " : "") << num(f.px(line[k].alpha)) << ',' << num(f.py(line[k].beta));
      }
      out << "\"/>\n";
    }
  }
  out << "</g>\n";
  ticks(out, f, xs.size() > 6 ? even_ticks(xs.front(), xs.back(), 6) : xs,
        ys.size() > 6 ? even_ticks(ys.front(), ys.back(), 6) : ys);
  axis_labels(out, labels.x_label, labels.y_label);

  // Legend: ten-step bar from vmin (bottom) to vmax (top).
  const double lx = kWidth - kRight + 25;
  const double top = kTop;
  const double h = (kHeight - kTop - kBottom) / 10.0;
  for (int k = 0; k < 10; ++k) {
    out << "<rect x=\"" << num(lx) << "\" y=\"" << num(top + (9 - k) * h) << "\" width=\"18\" height=\"" << num(h)
        << "\" fill=\"" << ramp_colour((k + 0.5) / 10.0) << "\"/>\n";
  }
  out << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(top + 10) << "\" font-size=\"10\">" << label_num(vmax)
      << "</text>\n";
  out << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(top + 10 * h) << "\" font-size=\"10\">" << label_num(vmin)
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string ekma_heatmap(const EkmaSurface& surface, const std::vector<Isopleth>& isopleths) {
  return heatmap(surface.alphas, surface.betas, surface.o3_mean, isopleths, HeatmapLabels{});
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  const double pad = y1 > y0 ? 0.05 * (y1 - y0) : 0.001;
  const Frame f{x0, x1, y0 - pad, y1 + pad};

  std::ostringstream out;
  open_svg(out, title);
  ticks(out, f, even_ticks(x0, x1, 6), even_ticks(f.y0, f.y1, 5));
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[k].points.size(); ++i) {
      const auto& [x, y] = series[k].points[i];
      out << (i ? " " : "") << num(f.px(x)) << ',' << num(f.py(y));
    }
    out << "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    out << "<line x1=\"" << num(kWidth - kRight + 8) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(kWidth - kRight + 24) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>";
    out << "<text x=\"" << num(kWidth - kRight + 28) << "\" y=\"" << num(ly) << "\" font-size=\"10\">"
        << escape_xml(series[k].name) << "</text>\n";
  }
  axis_labels(out, x_label, y_label);
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::filesystem::path& dest, const std::string& content) {
  std::ofstream out(dest, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + dest.string());
  out << content;
  if (!out) throw Error("write failed for " + dest.string());
}

void render_heatmap(const EkmaSurface& surface, const std::vector<Isopleth>& isopleths,
                    const std::filesystem::path& dest) {
  write_file(dest, ekma_heatmap(surface, isopleths));
}

}  // namespace ekma::svg
