#pragma once

// Output helpers for the lab: CSV tables, static SVG plots and manifests.
// Numbers are printed in shortest round-trip form so files are byte-stable.

#include <string>
#include <utility>
#include <vector>

namespace rcgff::lab::io {

std::string num(double v);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

/// Creates the directory (and parents) if needed; io error on failure.
void ensure_dir(const std::string& dir);
/// Writes text to dir/name and records the path in `written`.
void write_file(const std::string& dir, const std::string& name,
                const std::string& text, std::vector<std::string>& written);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

/// Line plot with linear or log-x axes.
std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel,
                      const std::vector<Series>& series, bool log_x = false);

/// Heatmap of a row-major rows x cols grid with a fixed colour range.
std::string heatmap(const std::string& title, const std::vector<double>& values,
                    int rows, int cols, double vmin, double vmax);

/// Histogram (bar heights already normalised as densities) with an
/// optional overlay curve.
std::string histogram(const std::string& title, const std::vector<double>& edges,
                      const std::vector<double>& density,
                      const Series* overlay = nullptr);

}  // namespace rcgff::lab::io
