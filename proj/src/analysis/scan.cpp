#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xrdn/analysis.hpp"
#include "xrdn/csv.hpp"

namespace xrdn::analysis {

namespace {

constexpr double kWindowSlack = 1e-12;

bool same_axis(const AxisSpec& a, const AxisSpec& b) {
    return a.label == b.label && a.origin == b.origin && a.step == b.step;
}

double axis_value(const AxisSpec& a, int i) { return a.origin + a.step * i; }

void check_inside(double q, const AxisSpec& a, int count, const char* name) {
    const double lo = std::min(a.origin, axis_value(a, count - 1));
    const double hi = std::max(a.origin, axis_value(a, count - 1));
    if (q < lo - kWindowSlack || q > hi + kWindowSlack)
        throw FrameError(std::string("project_scan: q0 ") + name +
                         " outside the covered volume");
}

std::vector<int> select_indices(const AxisSpec& a, int count, double center,
                                double half_width) {
    std::vector<int> out;
    for (int i = 0; i < count; ++i)
        if (std::abs(axis_value(a, i) - center) <= half_width + kWindowSlack)
            out.push_back(i);
    return out;
}

}  // namespace

ScanProjection project_scan(const std::vector<Frame>& stack, const QPoint& q0,
                            ScanAxis axis, const ScanWindow& window) {
    if (stack.empty()) throw FrameError("project_scan: empty stack");
    const Frame& first = stack.front();
    if (!first.axes) throw FrameError("project_scan: missing axes metadata");
    for (const Frame& f : stack) {
        validate_frame(f, "project_scan", false);
        if (!f.same_shape(first))
            throw FrameError("project_scan: frame shapes differ");
        if (!f.axes || !same_axis(f.axes->x, first.axes->x) ||
            !same_axis(f.axes->y, first.axes->y))
            throw FrameError("project_scan: frame axes differ");
    }

    const AxisSpec& ax = first.axes->x;
    const AxisSpec& ay = first.axes->y;
    const int w = first.width;
    const int h = first.height;
    const int nf = static_cast<int>(stack.size());

    const bool have_k = std::all_of(stack.begin(), stack.end(), [](const Frame& f) {
        return f.axes->stack.has_value();
    });
    if (axis == ScanAxis::k && !have_k)
        throw FrameError("project_scan: k scan needs the stack axis");

    std::vector<double> kval(static_cast<std::size_t>(nf), 0.0);
    if (have_k)
        for (int i = 0; i < nf; ++i) kval[static_cast<std::size_t>(i)] = stack[i].axes->stack->origin;

    check_inside(q0.h, ax, w, "h");
    check_inside(q0.l, ay, h, "l");
    if (have_k) {
        const auto [mn, mx] = std::minmax_element(kval.begin(), kval.end());
        if (q0.k < *mn - kWindowSlack || q0.k > *mx + kWindowSlack)
            throw FrameError("project_scan: q0 k outside the covered volume");
    }

    std::vector<int> frames_in;
    if (have_k) {
        for (int i = 0; i < nf; ++i)
            if (std::abs(kval[static_cast<std::size_t>(i)] - q0.k) <=
                window.k + kWindowSlack)
                frames_in.push_back(i);
    } else {
        for (int i = 0; i < nf; ++i) frames_in.push_back(i);
    }

    const std::vector<int> cols_in = select_indices(ax, w, q0.h, window.h);
    const std::vector<int> rows_in = select_indices(ay, h, q0.l, window.l);

    ScanProjection scan;
    scan.axis = axis;

    auto accumulate_point = [&](double coord, const std::vector<int>& fs,
                                const std::vector<int>& rs,
                                const std::vector<int>& cs) {
        double sum = 0.0;
        std::size_t live = 0;
        for (int fi : fs) {
            const Frame& f = stack[static_cast<std::size_t>(fi)];
            for (int r : rs)
                for (int c : cs) {
                    if (f.is_dead(r, c)) continue;
                    sum += static_cast<double>(f.at(r, c));
                    ++live;
                }
        }
        if (live == 0)
            throw FrameError("project_scan: integration window has no live pixels");
        scan.coordinate.push_back(coord);
        scan.intensity.push_back(sum / static_cast<double>(live));
        scan.error.push_back(std::sqrt(std::max(sum, 0.0)) /
                             static_cast<double>(live));
    };

    if (axis == ScanAxis::h) {
        if (frames_in.empty() || rows_in.empty())
            throw FrameError("project_scan: transverse window is empty");
        for (int c = 0; c < w; ++c)
            accumulate_point(axis_value(ax, c), frames_in, rows_in, {c});
    } else if (axis == ScanAxis::l) {
        if (frames_in.empty() || cols_in.empty())
            throw FrameError("project_scan: transverse window is empty");
        for (int r = 0; r < h; ++r)
            accumulate_point(axis_value(ay, r), frames_in, {r}, cols_in);
    } else {
        if (rows_in.empty() || cols_in.empty())
            throw FrameError("project_scan: transverse window is empty");
        for (int i = 0; i < nf; ++i)
            accumulate_point(kval[static_cast<std::size_t>(i)], {i}, rows_in,
                             cols_in);
        for (std::size_t i = 1; i < scan.coordinate.size(); ++i) {
            const double d = scan.coordinate[i] - scan.coordinate[i - 1];
            const double d0 = scan.coordinate[1] - scan.coordinate[0];
            if (d == 0.0 || d * d0 < 0.0)
                throw FrameError("project_scan: stack coordinates not monotone");
        }
    }
    return scan;
}

ScanProjection subtract_background(const ScanProjection& scan,
                                   double flank_fraction) {
    const std::size_t n = scan.coordinate.size();
    if (flank_fraction <= 0.0 || flank_fraction > 0.4)
        throw FrameError("subtract_background: flank fraction must be in (0, 0.4]");
    if (n < 8)
        throw FrameError("subtract_background: scan needs at least 8 points");

    const std::size_t per_side = std::max<std::size_t>(
        1, static_cast<std::size_t>(flank_fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < per_side; ++i) idx.push_back(i);
    for (std::size_t i = n - per_side; i < n; ++i) idx.push_back(i);

    double sq = 0.0, sy = 0.0;
    for (std::size_t i : idx) {
        sq += scan.coordinate[i];
        sy += scan.intensity[i];
    }
    const double m = static_cast<double>(idx.size());
    const double qm = sq / m, ym = sy / m;
    double sqq = 0.0, sqy = 0.0;
    for (std::size_t i : idx) {
        const double dq = scan.coordinate[i] - qm;
        sqq += dq * dq;
        sqy += dq * (scan.intensity[i] - ym);
    }
    if (sqq <= 0.0)
        throw FrameError("subtract_background: degenerate flank coordinates");

    const double slope = sqy / sqq;
    const double offset = ym - slope * qm;

    ScanProjection out = scan;
    for (std::size_t i = 0; i < n; ++i)
        out.intensity[i] -= offset + slope * scan.coordinate[i];
    out.background_subtracted = true;
    out.background_offset = offset;
    out.background_slope = slope;
    return out;
}

void write_scan_csv(const std::string& path, const ScanProjection& scan) {
    CsvTable t;
    t.header = {"coordinate", "intensity", "error"};
    for (std::size_t i = 0; i < scan.coordinate.size(); ++i)
        t.rows.push_back({format_double(scan.coordinate[i]),
                          format_double(scan.intensity[i]),
                          format_double(scan.error[i])});
    write_csv(path, t);
}

}  // namespace xrdn::analysis
