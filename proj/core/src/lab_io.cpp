#include "lab_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcgff/errors.hpp"

namespace rcgff::lab::io {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i)
    text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

Csv& Csv::row(const std::vector<std::string>& cells) {
  require(cells.size() == width_, ErrorKind::parameter, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
  return *this;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::io, "cannot create directory " + dir);
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& text, std::vector<std::string>& written) {
  ensure_dir(dir);
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path);
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed: " + path);
  written.push_back(path);
}

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 55;

std::string f3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string g4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = lo;
    lo = c - 0.5 * (std::abs(c) + 1.0);
    hi = c + 0.5 * (std::abs(c) + 1.0);
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title,
          const std::string& xlabel, const std::string& ylabel, bool log_x) {
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << (kW - kL - kR)
     << "\" height=\"" << (kH - kT - kB)
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << kH / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << kH / 2 << ")\">" << escape(ylabel) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << f3(f.px(xv)) << "\" y=\"" << kH - kB + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">"
       << g4(log_x ? std::exp(xv) : xv) << "</text>\n";
    os << "<text x=\"" << kL - 6 << "\" y=\"" << f3(f.py(yv) + 3)
       << "\" text-anchor=\"end\" font-size=\"10\">" << g4(yv) << "</text>\n";
  }
}

std::string open_svg(double w = kW, double h = kH) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" "
        "fill=\"white\"/>\n";
  return os.str();
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel,
                      const std::vector<Series>& series, bool log_x) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = log_x ? std::log(s.x[i]) : s.x[i];
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  pad(x0, x1);
  pad(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  os << open_svg();
  axes(os, f, title, xlabel, ylabel, log_x);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << (i ? " " : "") << f3(f.px(log_x ? std::log(s.x[i]) : s.x[i])) << ','
         << f3(f.py(s.y[i]));
    os << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << f3(f.px(log_x ? std::log(s.x[i]) : s.x[i]))
           << "\" cy=\"" << f3(f.py(s.y[i])) << "\" r=\"3\" fill=\"" << col
           << "\"/>\n";
    os << "<text x=\"" << kL + 10 << "\" y=\"" << kT + 16 + 14 * k
       << "\" font-size=\"11\" fill=\"" << col << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const std::vector<double>& values,
                    int rows, int cols, double vmin, double vmax) {
  const double cell = std::max(2.0, std::floor(480.0 / std::max(rows, cols)));
  const double w = cols * cell + 100, h = rows * cell + 60;
  std::ostringstream os;
  os << open_svg(w, h);
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-size=\"14\">"
     << escape(title) << "</text>\n";
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  // Diverging blue-white-red map on [vmin, vmax].
  auto colour = [&](double v) {
    double s = std::clamp((v - vmin) / span, 0.0, 1.0) * 2.0 - 1.0;
    int r, g, b;
    if (s < 0) {
      r = static_cast<int>(255 * (1 + s));
      g = r;
      b = 255;
    } else {
      r = 255;
      g = static_cast<int>(255 * (1 - s));
      b = g;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      os << "<rect x=\"" << 10 + j * cell << "\" y=\"" << 40 + (rows - 1 - i) * cell
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
         << colour(values[static_cast<std::size_t>(i) * cols + j]) << "\"/>\n";
  for (int k = 0; k <= 10; ++k) {
    const double v = vmin + span * k / 10.0;
    os << "<rect x=\"" << cols * cell + 30 << "\" y=\""
       << 40 + (10 - k) * rows * cell / 11.0 << "\" width=\"14\" height=\""
       << rows * cell / 11.0 << "\" fill=\"" << colour(v) << "\"/>\n";
    if (k % 5 == 0)
      os << "<text x=\"" << cols * cell + 48 << "\" y=\""
         << 40 + (10.5 - k) * rows * cell / 11.0
         << "\" font-size=\"10\">" << g4(v) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string histogram(const std::string& title, const std::vector<double>& edges,
                      const std::vector<double>& density,
                      const Series* overlay) {
  double y1 = 0;
  for (double v : density) y1 = std::max(y1, v);
  if (overlay)
    for (double v : overlay->y) y1 = std::max(y1, v);
  double x0 = edges.front(), x1 = edges.back(), y0 = 0;
  if (!(y1 > 0)) y1 = 1;
  y1 *= 1.05;
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  os << open_svg();
  axes(os, f, title, "value", "density", false);
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double a = f.px(edges[i]), b = f.px(edges[i + 1]);
    os << "<rect x=\"" << f3(a) << "\" y=\"" << f3(f.py(density[i]))
       << "\" width=\"" << f3(b - a) << "\" height=\""
       << f3(f.py(0) - f.py(density[i]))
       << "\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n";
  }
  if (overlay) {
    os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
          "points=\"";
    for (std::size_t i = 0; i < overlay->x.size(); ++i)
      os << (i ? " " : "") << f3(f.px(overlay->x[i])) << ','
         << f3(f.py(overlay->y[i]));
    os << "\"/>\n<text x=\"" << kL + 10 << "\" y=\"" << kT + 16
       << "\" font-size=\"11\" fill=\"#d62728\">" << escape(overlay->label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace rcgff::lab::io
