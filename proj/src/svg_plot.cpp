#include "multistage/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace multistage {

namespace {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double value) {
        lo = std::min(lo, value);
        hi = std::max(hi, value);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double margin = 0.08 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw_step = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = mag;
    for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * mult >= raw_step) {
            step = mag * mult;
            break;
        }
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
        ticks.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return ticks;
}

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series,
                    const std::vector<SvgRefLine>& ref_lines,
                    const std::string& metadata_comment) {
    const double width = 720, height = 520;
    const double left = 80, right = 40, top = 50, bottom = 70;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    Range xr, yr;
    for (const auto& s : series) {
        for (const auto& [x, y, err] : s.points) {
            xr.include(x);
            yr.include(y - err);
            yr.include(y + err);
        }
    }
    for (const auto& line : ref_lines)
        for (const auto& [x, y] : line.points) {
            xr.include(x);
            yr.include(y);
        }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
        throw std::invalid_argument("write_svg_plot: nothing to plot");
    xr.pad();
    yr.pad();

    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<!-- " << escape_xml(metadata_comment) << " -->\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    // axes box and ticks
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#222\"/>\n";
    for (double tick : nice_ticks(xr.lo, xr.hi)) {
        const double x = px(tick);
        svg << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x
            << "\" y2=\"" << top + plot_h + 6 << "\" stroke=\"#222\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << top + plot_h + 22
            << "\" font-size=\"13\" text-anchor=\"middle\">" << fmt(tick) << "</text>\n";
    }
    for (double tick : nice_ticks(yr.lo, yr.hi)) {
        const double y = py(tick);
        svg << "<line x1=\"" << left - 6 << "\" y1=\"" << y << "\" x2=\"" << left
            << "\" y2=\"" << y << "\" stroke=\"#222\"/>\n";
        svg << "<text x=\"" << left - 10 << "\" y=\"" << y + 4
            << "\" font-size=\"13\" text-anchor=\"end\">" << fmt(tick) << "</text>\n";
    }

    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 18
        << "\" font-size=\"15\" text-anchor=\"middle\">" << escape_xml(x_label)
        << "</text>\n";
    svg << "<text x=\"20\" y=\"" << top + plot_h / 2
        << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << top + plot_h / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"28\" font-size=\"17\" "
        << "text-anchor=\"middle\">" << escape_xml(title) << "</text>\n";

    for (const auto& line : ref_lines) {
        svg << "<polyline fill=\"none\" stroke=\"" << line.color << "\" stroke-dasharray=\""
            << line.dash << "\" points=\"";
        for (const auto& [x, y] : line.points) svg << px(x) << ',' << py(y) << ' ';
        svg << "\"/>\n";
    }

    for (const auto& s : series) {
        for (const auto& [x, y, err] : s.points) {
            const double cx = px(x);
            if (err > 0.0) {
                svg << "<line x1=\"" << cx << "\" y1=\"" << py(y - err) << "\" x2=\"" << cx
                    << "\" y2=\"" << py(y + err) << "\" stroke=\"" << s.color << "\"/>\n";
                for (double cap : {y - err, y + err})
                    svg << "<line x1=\"" << cx - 4 << "\" y1=\"" << py(cap) << "\" x2=\""
                        << cx + 4 << "\" y2=\"" << py(cap) << "\" stroke=\"" << s.color
                        << "\"/>\n";
            }
            svg << "<circle cx=\"" << cx << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\""
                << (s.open_marker ? std::string("white") : s.color) << "\" stroke=\""
                << s.color << "\"/>\n";
        }
    }

    double legend_y = top + 16;
    for (const auto& s : series) {
        svg << "<circle cx=\"" << left + plot_w - 150 << "\" cy=\"" << legend_y - 4
            << "\" r=\"4\" fill=\"" << (s.open_marker ? std::string("white") : s.color)
            << "\" stroke=\"" << s.color << "\"/>\n";
        svg << "<text x=\"" << left + plot_w - 140 << "\" y=\"" << legend_y
            << "\" font-size=\"13\">" << escape_xml(s.label) << "</text>\n";
        legend_y += 18;
    }
    for (const auto& line : ref_lines) {
        svg << "<line x1=\"" << left + plot_w - 158 << "\" y1=\"" << legend_y - 4
            << "\" x2=\"" << left + plot_w - 142 << "\" y2=\"" << legend_y - 4
            << "\" stroke=\"" << line.color << "\" stroke-dasharray=\"" << line.dash
            << "\"/>\n";
        svg << "<text x=\"" << left + plot_w - 140 << "\" y=\"" << legend_y
            << "\" font-size=\"13\">" << escape_xml(line.label) << "</text>\n";
        legend_y += 18;
    }

    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << svg.str();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace multistage
