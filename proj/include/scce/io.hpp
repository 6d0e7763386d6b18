#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace scce::io {

/// Deterministic decimal rendering shared by every writer, so identical
/// values always serialize to identical bytes.
std::string format_number(double v);

/// RFC 4180 field quoting: fields containing comma, quote, CR or LF are
/// wrapped in quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

/// Writes an RFC 4180 file: header row plus data rows, CRLF line endings.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

/// Minimal SVG 1.1 line plot: one polyline per series, axes with ticks and
/// a legend. Returns the document text.
struct PlotSeries {
  std::string name;
  std::string color;  // e.g. "#1b6ca8"
  std::vector<std::pair<double, double>> points;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

std::string render_line_plot(const LinePlot& plot);

/// SVG 1.1 heatmap of a row-major matrix with values in [0, 1].
/// kOlive maps 1 to olive green on white (acceptance maps), kGray maps
/// values to a white-to-black ramp (p-value maps).
enum class HeatmapPalette { kOlive, kGray };

struct Heatmap {
  std::string title;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major, length rows * cols
  HeatmapPalette palette = HeatmapPalette::kOlive;
};

std::string render_heatmap(const Heatmap& map);

}  // namespace scce::io
