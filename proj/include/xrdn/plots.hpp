#pragma once

#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn::report {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;   // optional, empty for none
    std::string color;          // empty picks from the default palette
    bool points = false;        // markers at each sample in addition to the line
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 480;
    bool log_y = false;
};

// Standalone SVG line/scatter plot. Every number drawn here must also exist
// in a CSV next to it; the plot is presentation only.
void write_svg_lines(const std::string& path, const PlotSpec& spec,
                     const std::vector<Series>& series);

// Histogram bars (centers share one bar width) plus optional overlay curves.
void write_svg_histogram(const std::string& path, const PlotSpec& spec,
                         const std::vector<double>& centers,
                         const std::vector<double>& density, double bar_width,
                         const std::vector<Series>& overlays);

// 8-bit grayscale export; values map linearly from [lo, hi] to [0, 255].
void write_pgm(const std::string& path, const Frame& f, double lo, double hi);

}  // namespace xrdn::report
