#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace xrdn::analysis {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Plain Nelder-Mead with standard coefficients. Stops when every coordinate
// spread of the simplex falls below rel_tol relative to the best vertex, or
// after max_iter iterations.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0,
                                 const std::vector<double>& step,
                                 double rel_tol = 1e-8, int max_iter = 2000) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("simplex: empty start point");
    if (step.size() != n) throw std::invalid_argument("simplex: step size mismatch");

    std::vector<std::vector<double>> v(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i)
        v[i + 1][i] += step[i] != 0.0 ? step[i] : 1e-4;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(v[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            v2[i] = std::move(v[idx[i]]);
            f2[i] = fv[idx[i]];
        }
        v = std::move(v2);
        fv = std::move(f2);
    };

    SimplexResult res;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();

        bool tight = true;
        for (std::size_t j = 0; j < n && tight; ++j) {
            double spread = 0.0;
            for (std::size_t i = 1; i <= n; ++i)
                spread = std::max(spread, std::abs(v[i][j] - v[0][j]));
            if (spread > rel_tol * std::max(1.0, std::abs(v[0][j])))
                tight = false;
        }
        if (tight) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += v[i][j];
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + t * (v[n][j] - centroid[j]);
            return p;
        };

        std::vector<double> xr = blend(-1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            std::vector<double> xe = blend(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                v[n] = std::move(xe);
                fv[n] = fe;
            } else {
                v[n] = std::move(xr);
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            v[n] = std::move(xr);
            fv[n] = fr;
        } else {
            std::vector<double> xc = blend(fr < fv[n] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[n])) {
                v[n] = std::move(xc);
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        v[i][j] = v[0][j] + 0.5 * (v[i][j] - v[0][j]);
                    fv[i] = f(v[i]);
                }
            }
        }
    }

    order();
    res.x = v[0];
    res.value = fv[0];
    res.iterations = iter;
    return res;
}

}  // namespace xrdn::analysis
