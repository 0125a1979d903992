#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "xrdn/analysis.hpp"
#include "xrdn/analysis/simplex.hpp"
#include "xrdn/lattice.hpp"

namespace xrdn::analysis {

namespace {

double gaussian_model(double q, double a, double q0, double sigma, double b) {
    const double s = std::max(std::abs(sigma), std::numeric_limits<double>::min());
    const double z = (q - q0) / s;
    return std::abs(a) * std::exp(-0.5 * z * z) + b;
}

// 4x4 inverse by Gauss-Jordan with partial pivoting; false when singular.
bool invert4(std::array<std::array<double, 4>, 4>& m) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < 1e-300) return false;
        std::swap(m[col], m[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = m[col][col];
        for (int c = 0; c < 4; ++c) {
            m[col][c] /= d;
            inv[col][c] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m[r][col];
            for (int c = 0; c < 4; ++c) {
                m[r][c] -= f * m[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    m = inv;
    return true;
}

}  // namespace

PeakFit fit_gaussian_1d(const ScanProjection& scan) {
    const std::size_t n = scan.coordinate.size();
    if (n < 5) throw FrameError("fit_gaussian_1d: need at least 5 points");
    if (scan.intensity.size() != n)
        throw FrameError("fit_gaussian_1d: ragged scan");

    const auto [ymin_it, ymax_it] =
        std::minmax_element(scan.intensity.begin(), scan.intensity.end());
    const std::size_t peak_idx = static_cast<std::size_t>(
        std::distance(scan.intensity.begin(), ymax_it));
    const double span = std::abs(scan.coordinate.back() - scan.coordinate.front());
    const double yrange = *ymax_it - *ymin_it;

    auto ssr = [&](const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = gaussian_model(scan.coordinate[i], p[0], p[1],
                                            p[2], p[3]) -
                             scan.intensity[i];
            s += r * r;
        }
        return s;
    };

    const std::vector<double> x0 = {yrange, scan.coordinate[peak_idx],
                                    span / 4.0, *ymin_it};
    const std::vector<double> step = {
        0.1 * std::max(yrange, 1e-12), 0.05 * std::max(span, 1e-12),
        0.1 * std::max(span / 4.0, 1e-12), 0.1 * std::max(yrange, 1e-12)};

    const SimplexResult res = nelder_mead(ssr, x0, step, 1e-8, 2000);

    PeakFit fit;
    fit.amplitude = std::abs(res.x[0]);
    fit.center = res.x[1];
    fit.sigma = std::abs(res.x[2]);
    fit.offset = res.x[3];
    fit.converged = res.converged && fit.sigma > 0.0;

    // Curvature-based uncertainties: cov = 2 s^2 H^-1 with H the numerical
    // Hessian of the sum of squares at the optimum.
    if (n > 4) {
        const std::vector<double> at = {fit.amplitude, fit.center, fit.sigma,
                                        fit.offset};
        const double s2 = ssr(at) / static_cast<double>(n - 4);
        const std::array<double, 4> scale = {
            std::max(yrange, 1e-9), std::max(span, 1e-9),
            std::max(span, 1e-9), std::max(yrange, 1e-9)};
        std::array<double, 4> hstep{};
        for (int i = 0; i < 4; ++i)
            hstep[static_cast<std::size_t>(i)] =
                1e-4 * std::max(std::abs(at[static_cast<std::size_t>(i)]),
                                1e-3 * scale[static_cast<std::size_t>(i)]);

        auto eval = [&](int i, double di, int j, double dj) {
            std::vector<double> p = at;
            p[static_cast<std::size_t>(i)] += di;
            p[static_cast<std::size_t>(j)] += dj;
            return ssr(p);
        };
        const double f0 = ssr(at);
        std::array<std::array<double, 4>, 4> hess{};
        for (int i = 0; i < 4; ++i) {
            const double hi = hstep[static_cast<std::size_t>(i)];
            hess[i][i] = (eval(i, hi, i, 0.0) - 2.0 * f0 + eval(i, -hi, i, 0.0)) /
                         (hi * hi);
            for (int j = i + 1; j < 4; ++j) {
                const double hj = hstep[static_cast<std::size_t>(j)];
                const double v = (eval(i, hi, j, hj) - eval(i, hi, j, -hj) -
                                  eval(i, -hi, j, hj) + eval(i, -hi, j, -hj)) /
                                 (4.0 * hi * hj);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        if (invert4(hess)) {
            auto err = [&](int i) {
                const double v = 2.0 * s2 * hess[i][i];
                return v > 0.0 ? std::sqrt(v) : 0.0;
            };
            fit.amplitude_err = err(0);
            fit.center_err = err(1);
            fit.sigma_err = err(2);
            fit.offset_err = err(3);
        }
    }
    return fit;
}

double correlation_length(const PeakFit& fit, double lattice_constant) {
    if (!fit.converged)
        throw FrameError("correlation_length: fit did not converge");
    if (lattice_constant <= 0.0)
        throw FrameError("correlation_length: lattice constant must be positive");
    return lattice_constant / (kPi * kFwhmFactor * fit.sigma);
}

double integrated_intensity(const PeakFit& fit) {
    if (!fit.converged)
        throw FrameError("integrated_intensity: fit did not converge");
    return fit.amplitude * kFwhmFactor * fit.sigma;
}

namespace {

AxisRatios axis_ratios(const PeakFit& hc, const PeakFit& dn, double lattice) {
    AxisRatios out;
    if (!hc.converged || !dn.converged) return out;
    out.xi_hc = correlation_length(hc, lattice);
    out.xi_do = correlation_length(dn, lattice);
    out.w_hc = integrated_intensity(hc);
    out.w_do = integrated_intensity(dn);

    auto rel = [](double err, double val) {
        return val != 0.0 ? err / val : 0.0;
    };
    out.xi_ratio.value = out.xi_do / out.xi_hc;
    out.xi_ratio.error =
        std::abs(out.xi_ratio.value) *
        std::sqrt(rel(hc.sigma_err, hc.sigma) * rel(hc.sigma_err, hc.sigma) +
                  rel(dn.sigma_err, dn.sigma) * rel(dn.sigma_err, dn.sigma));
    out.xi_ratio.present = true;

    out.w_ratio.value = out.w_do / out.w_hc;
    const double rw_hc =
        rel(hc.amplitude_err, hc.amplitude) * rel(hc.amplitude_err, hc.amplitude) +
        rel(hc.sigma_err, hc.sigma) * rel(hc.sigma_err, hc.sigma);
    const double rw_do =
        rel(dn.amplitude_err, dn.amplitude) * rel(dn.amplitude_err, dn.amplitude) +
        rel(dn.sigma_err, dn.sigma) * rel(dn.sigma_err, dn.sigma);
    out.w_ratio.error = std::abs(out.w_ratio.value) * std::sqrt(rw_hc + rw_do);
    out.w_ratio.present = true;
    return out;
}

}  // namespace

CorrelationReport ratio_report(const PeakFit& hc_a, const PeakFit& do_a,
                               const PeakFit& hc_c, const PeakFit& do_c) {
    CorrelationReport rep;
    rep.a = axis_ratios(hc_a, do_a, kLatticeA);
    rep.c = axis_ratios(hc_c, do_c, kLatticeC);
    return rep;
}

}  // namespace xrdn::analysis
