#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "xrdn/csv.hpp"
#include "xrdn/plots.hpp"

namespace xrdn::report {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 48.0;

struct Bounds {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

    void include(double x, double y) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// Round tick spacing to 1/2/5 times a power of ten.
std::vector<double> make_ticks(double lo, double hi) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 0.5 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

class SvgCanvas {
public:
    SvgCanvas(const PlotSpec& spec, const Bounds& b)
        : spec_(spec), b_(b) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
             << spec.width << "\" height=\"" << spec.height
             << "\" viewBox=\"0 0 " << spec.width << " " << spec.height
             << "\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    double px(double x) const {
        const double w = spec_.width - kMarginLeft - kMarginRight;
        return kMarginLeft + (x - b_.xmin) / (b_.xmax - b_.xmin) * w;
    }

    double py(double y) const {
        const double h = spec_.height - kMarginTop - kMarginBottom;
        if (spec_.log_y) y = std::log10(std::max(y, 1e-300));
        double ymin = b_.ymin, ymax = b_.ymax;
        if (spec_.log_y) {
            ymin = std::log10(std::max(b_.ymin, 1e-300));
            ymax = std::log10(std::max(b_.ymax, 1e-300));
        }
        return kMarginTop + (ymax - y) / (ymax - ymin) * h;
    }

    void frame_and_ticks() {
        const double x0 = kMarginLeft, x1 = spec_.width - kMarginRight;
        const double y0 = kMarginTop, y1 = spec_.height - kMarginBottom;
        out_ << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\""
             << x1 - x0 << "\" height=\"" << y1 - y0
             << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (double t : make_ticks(b_.xmin, b_.xmax)) {
            if (t < b_.xmin || t > b_.xmax) continue;
            const double x = px(t);
            out_ << "<line x1=\"" << x << "\" y1=\"" << y1 << "\" x2=\"" << x
                 << "\" y2=\"" << y1 + 5 << "\" stroke=\"#444\"/>\n";
            out_ << "<text x=\"" << x << "\" y=\"" << y1 + 18
                 << "\" font-size=\"11\" text-anchor=\"middle\" "
                    "font-family=\"sans-serif\">"
                 << format_double(t, 5) << "</text>\n";
        }
        const bool logy = spec_.log_y;
        const double tick_lo = logy ? std::log10(std::max(b_.ymin, 1e-300)) : b_.ymin;
        const double tick_hi = logy ? std::log10(std::max(b_.ymax, 1e-300)) : b_.ymax;
        for (double t : make_ticks(tick_lo, tick_hi)) {
            if (t < tick_lo || t > tick_hi) continue;
            const double y = kMarginTop +
                             (tick_hi - t) / (tick_hi - tick_lo) * (y1 - y0);
            out_ << "<line x1=\"" << x0 - 5 << "\" y1=\"" << y << "\" x2=\""
                 << x0 << "\" y2=\"" << y << "\" stroke=\"#444\"/>\n";
            out_ << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4
                 << "\" font-size=\"11\" text-anchor=\"end\" "
                    "font-family=\"sans-serif\">"
                 << (logy ? "1e" + format_double(t, 4) : format_double(t, 5))
                 << "</text>\n";
        }
        if (!spec_.title.empty())
            out_ << "<text x=\"" << spec_.width / 2.0 << "\" y=\"20\" "
                 << "font-size=\"14\" text-anchor=\"middle\" "
                    "font-family=\"sans-serif\">"
                 << esc(spec_.title) << "</text>\n";
        if (!spec_.x_label.empty())
            out_ << "<text x=\"" << (x0 + x1) / 2.0 << "\" y=\""
                 << spec_.height - 10
                 << "\" font-size=\"12\" text-anchor=\"middle\" "
                    "font-family=\"sans-serif\">"
                 << esc(spec_.x_label) << "</text>\n";
        if (!spec_.y_label.empty())
            out_ << "<text x=\"14\" y=\"" << (y0 + y1) / 2.0
                 << "\" font-size=\"12\" text-anchor=\"middle\" "
                    "font-family=\"sans-serif\" transform=\"rotate(-90 14 "
                 << (y0 + y1) / 2.0 << ")\">" << esc(spec_.y_label)
                 << "</text>\n";
    }

    void polyline(const Series& s, const std::string& color) {
        if (s.x.size() < 2) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out_ << px(s.x[i]) << "," << py(s.y[i]) << " ";
        out_ << "\"/>\n";
    }

    void markers(const Series& s, const std::string& color) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out_ << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                 << "\" r=\"2.4\" fill=\"" << color << "\"/>\n";
    }

    void error_bars(const Series& s, const std::string& color) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.yerr[i] <= 0.0) continue;
            const double x = px(s.x[i]);
            out_ << "<line x1=\"" << x << "\" y1=\"" << py(s.y[i] - s.yerr[i])
                 << "\" x2=\"" << x << "\" y2=\"" << py(s.y[i] + s.yerr[i])
                 << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
        }
    }

    void legend(const std::vector<Series>& series,
                const std::vector<std::string>& colors) {
        double y = kMarginTop + 14.0;
        const double x = spec_.width - kMarginRight - 150.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (series[i].label.empty()) continue;
            out_ << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\""
                 << x + 22 << "\" y2=\"" << y - 4 << "\" stroke=\""
                 << colors[i] << "\" stroke-width=\"2\"/>\n";
            out_ << "<text x=\"" << x + 28 << "\" y=\"" << y
                 << "\" font-size=\"11\" font-family=\"sans-serif\">"
                 << esc(series[i].label) << "</text>\n";
            y += 15.0;
        }
    }

    void raw(const std::string& s) { out_ << s; }

    void save(const std::string& path) {
        out_ << "</svg>\n";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw FrameError("plot: cannot open " + path);
        f << out_.str();
        if (!f) throw FrameError("plot: write failed for " + path);
    }

private:
    PlotSpec spec_;
    Bounds b_;
    std::ostringstream out_;
};

Bounds series_bounds(const std::vector<Series>& series, bool log_y) {
    Bounds b;
    b.xmin = b.ymin = std::numeric_limits<double>::infinity();
    b.xmax = b.ymax = -std::numeric_limits<double>::infinity();
    for (const Series& s : series) {
        if (s.x.size() != s.y.size())
            throw FrameError("plot: series x/y length mismatch");
        if (!s.yerr.empty() && s.yerr.size() != s.x.size())
            throw FrameError("plot: series error length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double err = s.yerr.empty() ? 0.0 : s.yerr[i];
            if (log_y && s.y[i] - err <= 0.0) {
                b.include(s.x[i], std::max(s.y[i], 1e-12));
                continue;
            }
            b.include(s.x[i], s.y[i] - err);
            b.include(s.x[i], s.y[i] + err);
        }
    }
    if (!std::isfinite(b.xmin)) throw FrameError("plot: nothing to plot");
    if (b.xmax == b.xmin) {
        b.xmin -= 0.5;
        b.xmax += 0.5;
    }
    if (b.ymax == b.ymin) {
        b.ymin -= 0.5;
        b.ymax += 0.5;
    } else {
        const double pad = 0.05 * (b.ymax - b.ymin);
        if (!log_y) b.ymin -= pad;
        b.ymax += pad;
    }
    return b;
}

std::vector<std::string> assign_colors(const std::vector<Series>& series) {
    std::vector<std::string> colors;
    for (std::size_t i = 0; i < series.size(); ++i)
        colors.push_back(series[i].color.empty()
                             ? kPalette[i % kPaletteSize]
                             : series[i].color);
    return colors;
}

}  // namespace

void write_svg_lines(const std::string& path, const PlotSpec& spec,
                     const std::vector<Series>& series) {
    if (series.empty()) throw FrameError("plot: nothing to plot");
    const Bounds b = series_bounds(series, spec.log_y);
    SvgCanvas canvas(spec, b);
    canvas.frame_and_ticks();
    const std::vector<std::string> colors = assign_colors(series);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i].yerr.empty()) canvas.error_bars(series[i], colors[i]);
        canvas.polyline(series[i], colors[i]);
        if (series[i].points) canvas.markers(series[i], colors[i]);
    }
    canvas.legend(series, colors);
    canvas.save(path);
}

void write_svg_histogram(const std::string& path, const PlotSpec& spec,
                         const std::vector<double>& centers,
                         const std::vector<double>& density, double bar_width,
                         const std::vector<Series>& overlays) {
    if (centers.empty() || centers.size() != density.size())
        throw FrameError("plot: bad histogram input");
    if (bar_width <= 0.0) throw FrameError("plot: bar width must be positive");

    std::vector<Series> all = overlays;
    Series bars;
    bars.x = centers;
    bars.y = density;
    all.push_back(bars);
    Bounds b = series_bounds(all, spec.log_y);
    b.xmin = std::min(b.xmin, centers.front() - 0.5 * bar_width);
    b.xmax = std::max(b.xmax, centers.back() + 0.5 * bar_width);
    if (!spec.log_y) b.ymin = std::min(b.ymin, 0.0);

    SvgCanvas canvas(spec, b);
    canvas.frame_and_ticks();
    const double base = canvas.py(spec.log_y ? b.ymin : 0.0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double x0 = canvas.px(centers[i] - 0.5 * bar_width);
        const double x1 = canvas.px(centers[i] + 0.5 * bar_width);
        const double yt = canvas.py(density[i]);
        if (yt >= base) continue;
        std::ostringstream rect;
        rect << "<rect x=\"" << x0 << "\" y=\"" << yt << "\" width=\""
             << x1 - x0 << "\" height=\"" << base - yt
             << "\" fill=\"#9ecae1\" stroke=\"#4b7ea8\" stroke-width=\"0.5\"/>\n";
        canvas.raw(rect.str());
    }
    const std::vector<std::string> colors = assign_colors(overlays);
    for (std::size_t i = 0; i < overlays.size(); ++i) {
        canvas.polyline(overlays[i], colors[i]);
        if (overlays[i].points) canvas.markers(overlays[i], colors[i]);
    }
    canvas.legend(overlays, colors);
    canvas.save(path);
}

void write_pgm(const std::string& path, const Frame& f, double lo, double hi) {
    // Rendering only, so the dead-zero container invariant is not enforced
    // here; dead pixels are drawn black.
    const std::size_t n =
        static_cast<std::size_t>(f.height) * static_cast<std::size_t>(f.width);
    if (f.height <= 0 || f.width <= 0 || f.intensities.size() != n ||
        f.dead.size() != n)
        throw FrameError("pgm export: malformed frame");
    if (!(hi > lo)) throw FrameError("pgm export: empty value range");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FrameError("pgm export: cannot open " + path);
    out << "P5\n" << f.width << " " << f.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(f.width));
    for (int r = 0; r < f.height; ++r) {
        for (int c = 0; c < f.width; ++c) {
            const std::size_t i =
                static_cast<std::size_t>(r) * static_cast<std::size_t>(f.width) +
                static_cast<std::size_t>(c);
            const double t =
                f.dead[i] ? 0.0
                          : (static_cast<double>(f.intensities[i]) - lo) / (hi - lo);
            row[static_cast<std::size_t>(c)] = static_cast<unsigned char>(
                std::clamp(t, 0.0, 1.0) * 255.0 + 0.5);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw FrameError("pgm export: write failed for " + path);
}

}  // namespace xrdn::report
