#pragma once

#include <string>
#include <vector>

#include "hallpump/common.hpp"

namespace hallpump::io {

/// CSV with fixed %.17g number formatting (deterministic byte output).
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    void add_row_mixed(const std::vector<std::string>& values);
    void write(const std::string& path) const;
    std::string to_string() const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_g17(double x);

/// Minimal static SVG plots (vector graphics, no dependencies).
struct SeriesPlot {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
    struct Series {
        std::string name;
        std::string color;
        std::vector<double> x, y;
        bool line = true;
    };
    std::vector<Series> series;
    void write(const std::string& path, int width = 640, int height = 480) const;
};

struct HeatmapPlot {
    std::string title, x_label, y_label;
    std::vector<double> x; // column coordinates
    std::vector<double> y; // row coordinates
    std::vector<std::vector<double>> values; // [y][x]
    bool log_scale = true;
    void write(const std::string& path, int width = 640, int height = 480) const;
};

/// Machine-readable run summary: one [check:<name>] section per entry with
/// value, threshold, comparison direction and pass flag.
struct SummaryCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string direction = "le"; // le | ge
    bool pass = false;
};
void write_summary(const std::string& path, const std::vector<SummaryCheck>& checks);

void ensure_directory(const std::string& path);

} // namespace hallpump::io
