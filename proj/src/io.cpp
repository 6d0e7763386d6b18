#include "scce/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scce::io {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // normalizes -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(row[i]);
  }
  out += "\r\n";
}

}  // namespace

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  append_row(out, header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::invalid_argument("write_csv: row width does not match header");
    }
    append_row(out, row);
  }
  write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  stream << content;
  if (!stream) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 130;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisScale {
  double lo = 0.0;
  double hi = 1.0;

  double clamp_span() const { return hi > lo ? hi - lo : 1.0; }
};

double map_x(double v, const AxisScale& s) {
  return kMarginLeft +
         (v - s.lo) / s.clamp_span() * (kWidth - kMarginLeft - kMarginRight);
}

double map_y(double v, const AxisScale& s) {
  return kHeight - kMarginBottom -
         (v - s.lo) / s.clamp_span() * (kHeight - kMarginTop - kMarginBottom);
}

std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  AxisScale xs;
  AxisScale ys;
  bool any = false;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        xs.lo = xs.hi = x;
        ys.lo = ys.hi = y;
        any = true;
      } else {
        xs.lo = std::min(xs.lo, x);
        xs.hi = std::max(xs.hi, x);
        ys.lo = std::min(ys.lo, y);
        ys.hi = std::max(ys.hi, y);
      }
    }
  }
  if (!any) {
    throw std::invalid_argument("render_line_plot: no points");
  }
  // Pad the y range a little so flat series stay visible.
  const double pad = ys.hi > ys.lo ? 0.06 * (ys.hi - ys.lo) : 0.5;
  ys.lo -= pad;
  ys.hi += pad;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(plot.title) << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\""
      << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = xs.lo + tick * xs.clamp_span() / 4.0;
    const double fy = ys.lo + tick * ys.clamp_span() / 4.0;
    const double px = map_x(fx, xs);
    const double py = map_y(fy, ys);
    svg << "<line x1=\"" << fmt_px(px) << "\" y1=\""
        << kHeight - kMarginBottom << "\" x2=\"" << fmt_px(px) << "\" y2=\""
        << kHeight - kMarginBottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_px(px) << "\" y=\""
        << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << format_number(fx) << "</text>\n";
    svg << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << fmt_px(py)
        << "\" x2=\"" << kMarginLeft << "\" y2=\"" << fmt_px(py)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt_px(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << format_number(fy) << "</text>\n";
  }
  svg << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\""
      << kHeight - 12 << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(plot.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 "
      << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\">"
      << xml_escape(plot.y_label) << "</text>\n";

  int legend_row = 0;
  for (const auto& s : plot.series) {
    std::ostringstream pts;
    for (const auto& [x, y] : s.points) {
      pts << fmt_px(map_x(x, xs)) << ',' << fmt_px(map_y(y, ys)) << ' ';
    }
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      svg << "<circle cx=\"" << fmt_px(map_x(x, xs)) << "\" cy=\""
          << fmt_px(map_y(y, ys)) << "\" r=\"3\" fill=\"" << s.color
          << "\"/>\n";
    }
    const int ly = kMarginTop + 14 * legend_row++;
    svg << "<rect x=\"" << kWidth - kMarginRight + 10 << "\" y=\"" << ly
        << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMarginRight + 24 << "\" y=\"" << ly + 9
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_heatmap(const Heatmap& map) {
  if (map.rows < 1 || map.cols < 1 ||
      map.values.size() !=
          static_cast<std::size_t>(map.rows) * static_cast<std::size_t>(map.cols)) {
    throw std::invalid_argument("render_heatmap: bad dimensions");
  }
  const int cell = std::max(6, std::min(24, 480 / std::max(map.rows, map.cols)));
  const int left = 50;
  const int top = 50;
  const int width = left + map.cols * cell + 20;
  const int height = top + map.rows * cell + 20;

  auto color = [&](double v) {
    v = std::clamp(v, 0.0, 1.0);
    char buf[16];
    if (map.palette == HeatmapPalette::kOlive) {
      // 0 -> white, 1 -> olive green (107, 142, 35).
      const int r = static_cast<int>(std::lround(255 + v * (107 - 255)));
      const int g = static_cast<int>(std::lround(255 + v * (142 - 255)));
      const int b = static_cast<int>(std::lround(255 + v * (35 - 255)));
      std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    } else {
      const int w = static_cast<int>(std::lround(255 * (1.0 - v)));
      std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", w, w, w);
    }
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(map.title) << "</text>\n";
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      const double v =
          map.values[static_cast<std::size_t>(r) *
                         static_cast<std::size_t>(map.cols) +
                     static_cast<std::size_t>(c)];
      svg << "<rect x=\"" << left + c * cell << "\" y=\"" << top + r * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << color(v) << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    }
  }
  const int step =
      std::max(map.rows, map.cols) > 30 ? 10 : (std::max(map.rows, map.cols) > 12 ? 5 : 1);
  for (int r = 0; r < map.rows; r += step) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << top + r * cell + cell / 2 + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << r + 1 << "</text>\n";
  }
  for (int c = 0; c < map.cols; c += step) {
    svg << "<text x=\"" << left + c * cell + cell / 2 << "\" y=\"" << top - 6
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << c + 1 << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace scce::io
