#include "hallpump/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hallpump::io {

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw PreconditionError("csv row width mismatch");
    std::vector<std::string> row;
    for (double v : values) row.push_back(format_g17(v));
    rows_.push_back(std::move(row));
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& values) {
    if (values.size() != columns_.size())
        throw PreconditionError("csv row width mismatch");
    rows_.push_back(values);
}

std::string CsvWriter::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PreconditionError("cannot write " + path);
    os << to_string();
}

namespace {

struct Mapper {
    double lo, hi;
    double pix_lo, pix_hi;
    bool log;
    double operator()(double v) const {
        double t = log ? std::log10(std::max(v, 1e-300)) : v;
        double a = log ? std::log10(std::max(lo, 1e-300)) : lo;
        double b = log ? std::log10(std::max(hi, 1e-300)) : hi;
        if (b - a < 1e-300) b = a + 1.0;
        return pix_lo + (t - a) / (b - a) * (pix_hi - pix_lo);
    }
};

std::string svg_header(int w, int h, const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << w / 2 << "' y='18' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    return os.str();
}

} // namespace

void SeriesPlot::write(const std::string& path, int width, int height) const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && s.y[i] <= 0) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }

    const double l = 70, r = width - 20, b = height - 50, t = 40;
    Mapper mx{xmin, xmax, l, r, log_x};
    Mapper my{ymin, ymax, b, t, log_y};

    std::ostringstream os;
    os << svg_header(width, height, title);
    os << "<rect x='" << l << "' y='" << t << "' width='" << r - l << "' height='" << b - t
       << "' fill='none' stroke='black'/>\n";
    os << "<text x='" << (l + r) / 2 << "' y='" << height - 12
       << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    os << "<text x='16' y='" << (t + b) / 2 << "' text-anchor='middle' font-size='12' "
       << "transform='rotate(-90 16 " << (t + b) / 2 << ")'>" << y_label << "</text>\n";

    // ticks: 5 per axis at round positions
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double px = mx(log_x ? xmin * std::pow(xmax / xmin, i / 4.0) : fx);
        const double py = my(log_y ? ymin * std::pow(ymax / ymin, i / 4.0) : fy);
        const double vx = log_x ? xmin * std::pow(xmax / xmin, i / 4.0) : fx;
        const double vy = log_y ? ymin * std::pow(ymax / ymin, i / 4.0) : fy;
        os << "<line x1='" << px << "' y1='" << b << "' x2='" << px << "' y2='" << b + 5
           << "' stroke='black'/>\n";
        os << "<text x='" << px << "' y='" << b + 18 << "' text-anchor='middle' font-size='10'>"
           << format_g17(vx).substr(0, 8) << "</text>\n";
        os << "<line x1='" << l - 5 << "' y1='" << py << "' x2='" << l << "' y2='" << py
           << "' stroke='black'/>\n";
        os << "<text x='" << l - 8 << "' y='" << py + 3 << "' text-anchor='end' font-size='10'>"
           << format_g17(vy).substr(0, 8) << "</text>\n";
    }

    int legend_y = static_cast<int>(t) + 14;
    for (const auto& s : series) {
        std::ostringstream pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && s.y[i] <= 0) continue;
            pts << mx(s.x[i]) << "," << my(s.y[i]) << " ";
            os << "<circle cx='" << mx(s.x[i]) << "' cy='" << my(s.y[i]) << "' r='3' fill='"
               << s.color << "'/>\n";
        }
        if (s.line)
            os << "<polyline points='" << pts.str() << "' fill='none' stroke='" << s.color
               << "' stroke-width='1'/>\n";
        os << "<text x='" << r - 8 << "' y='" << legend_y << "' text-anchor='end' font-size='11' "
           << "fill='" << s.color << "'>" << s.name << "</text>\n";
        legend_y += 14;
    }
    os << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot write " + path);
    f << os.str();
}

void HeatmapPlot::write(const std::string& path, int width, int height) const {
    const size_t ny = values.size();
    const size_t nx = ny ? values[0].size() : 0;
    if (!nx) throw PreconditionError("empty heatmap");

    double vmin = 1e300, vmax = -1e300;
    for (const auto& row : values)
        for (double v : row) {
            const double w = log_scale ? std::log10(std::max(v, 1e-16)) : v;
            vmin = std::min(vmin, w);
            vmax = std::max(vmax, w);
        }
    if (vmax - vmin < 1e-30) vmax = vmin + 1.0;

    const double l = 70, r = width - 20, b = height - 50, t = 40;
    std::ostringstream os;
    os << svg_header(width, height, title);
    for (size_t iy = 0; iy < ny; ++iy)
        for (size_t ix = 0; ix < nx; ++ix) {
            const double v = log_scale ? std::log10(std::max(values[iy][ix], 1e-16))
                                       : values[iy][ix];
            const double f = (v - vmin) / (vmax - vmin);
            const int red = static_cast<int>(255 * f);
            const int blue = static_cast<int>(255 * (1 - f));
            const double x0 = l + (r - l) * ix / nx;
            const double y0 = b - (b - t) * (iy + 1) / ny;
            os << "<rect x='" << x0 << "' y='" << y0 << "' width='" << (r - l) / nx
               << "' height='" << (b - t) / ny << "' fill='rgb(" << red << ",0," << blue
               << ")'/>\n";
        }
    os << "<text x='" << (l + r) / 2 << "' y='" << height - 12
       << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    os << "<text x='16' y='" << (t + b) / 2 << "' text-anchor='middle' font-size='12' "
       << "transform='rotate(-90 16 " << (t + b) / 2 << ")'>" << y_label << "</text>\n";
    os << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot write " + path);
    f << os.str();
}

void write_summary(const std::string& path, const std::vector<SummaryCheck>& checks) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PreconditionError("cannot write " + path);
    os << "# hallpump run summary v1\n";
    for (const auto& c : checks) {
        os << "[check:" << c.name << "]\n";
        os << "value = " << format_g17(c.value) << "\n";
        os << "threshold = " << format_g17(c.threshold) << "\n";
        os << "direction = " << c.direction << "\n";
        os << "pass = " << (c.pass ? 1 : 0) << "\n\n";
    }
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw PreconditionError("cannot create directory " + path + ": " + ec.message());
}

} // namespace hallpump::io
