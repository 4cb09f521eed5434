#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace multistage {

/// Minimal self-contained SVG scatter/line plot, enough for the batch CLI:
/// point series with vertical error bars, reference polylines, axes with
/// ticks, a legend, and an embedded metadata comment.
struct SvgSeries {
    std::string label;
    std::string color = "#1f6fb2";
    bool open_marker = false;
    std::vector<std::array<double, 3>> points;  // x, y, half-width of error bar
};

struct SvgRefLine {
    std::string label;
    std::string color = "#555555";
    std::string dash = "6,4";
    std::vector<std::array<double, 2>> points;
};

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series,
                    const std::vector<SvgRefLine>& ref_lines,
                    const std::string& metadata_comment);

/// FNV-1a hash of a configuration string, for embedding in plot metadata.
std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace multistage
