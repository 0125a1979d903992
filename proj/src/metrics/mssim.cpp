#include <cmath>
#include <stdexcept>

#include "xrdn/metrics.hpp"

namespace xrdn {

namespace {

constexpr double kStructureFloor = 1e-30;
constexpr double kLuminanceFloor = 1e-30;

struct Level {
    int h = 0;
    int w = 0;
    std::vector<double> x;
    std::vector<double> y;
};

struct LevelStats {
    double mu_x, mu_y, var_x, var_y, sigma_x, sigma_y, cov;
    double l, c, s, s_guarded;
};

LevelStats level_stats(const Level& lv, double c1, double c2, double c3) {
    const std::size_t n = lv.x.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lv.x[i];
        sy += lv.y[i];
    }
    LevelStats st{};
    st.mu_x = sx * inv_n;
    st.mu_y = sy * inv_n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = lv.x[i] - st.mu_x;
        const double dy = lv.y[i] - st.mu_y;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    st.var_x = vx * inv_n;
    st.var_y = vy * inv_n;
    st.cov = cov * inv_n;
    st.sigma_x = std::sqrt(st.var_x);
    st.sigma_y = std::sqrt(st.var_y);

    st.l = (2.0 * st.mu_x * st.mu_y + c1) /
           (st.mu_x * st.mu_x + st.mu_y * st.mu_y + c1);
    st.c = (2.0 * st.sigma_x * st.sigma_y + c2) /
           (st.var_x + st.var_y + c2);
    st.s = (st.cov + c3) / (st.sigma_x * st.sigma_y + c3);
    st.s_guarded = std::max(st.s, kStructureFloor);
    return st;
}

Level downsample(const Level& lv) {
    Level out;
    out.h = lv.h / 2;
    out.w = lv.w / 2;
    out.x.resize(static_cast<std::size_t>(out.h) * out.w);
    out.y.resize(out.x.size());
    for (int r = 0; r < out.h; ++r) {
        for (int c = 0; c < out.w; ++c) {
            const std::size_t a = static_cast<std::size_t>(2 * r) * lv.w + 2 * c;
            const std::size_t b = a + lv.w;
            out.x[static_cast<std::size_t>(r) * out.w + c] =
                0.25 * (lv.x[a] + lv.x[a + 1] + lv.x[b] + lv.x[b + 1]);
            out.y[static_cast<std::size_t>(r) * out.w + c] =
                0.25 * (lv.y[a] + lv.y[a + 1] + lv.y[b] + lv.y[b + 1]);
        }
    }
    return out;
}

// Transpose of downsample: distributes each coarse gradient over its 2x2
// source block; rows/columns dropped by the pool receive zero.
void upsample_add(const std::vector<double>& coarse, int ch, int cw,
                  std::vector<double>& fine, int fh, int fw) {
    (void)fh;
    for (int r = 0; r < ch; ++r) {
        for (int c = 0; c < cw; ++c) {
            const double g = 0.25 * coarse[static_cast<std::size_t>(r) * cw + c];
            const std::size_t a = static_cast<std::size_t>(2 * r) * fw + 2 * c;
            fine[a] += g;
            fine[a + 1] += g;
            fine[a + fw] += g;
            fine[a + fw + 1] += g;
        }
    }
}

int effective_scales(int min_dim, int requested) {
    int m = 1;
    while (m < requested && (min_dim >> m) >= 1) ++m;
    return m;
}

}  // namespace

double mssim_d(const std::vector<double>& x, const std::vector<double>& y,
               int height, int width, const MssimParams& params,
               std::vector<double>* grad_x) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("mssim: non-positive dimensions");
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (x.size() != n || y.size() != n)
        throw std::invalid_argument("mssim: buffer size mismatch");
    if (params.scales < 1 || params.scales > 5)
        throw std::invalid_argument("mssim: scales must be in [1,5]");

    const double l_dyn = params.dynamic_range;
    const double c1 = (params.k1 * l_dyn) * (params.k1 * l_dyn);
    const double c2 = (params.k2 * l_dyn) * (params.k2 * l_dyn);
    const double c3 = c2 / 2.0;

    const int m = effective_scales(std::min(height, width), params.scales);
    double weight_sum = 0.0;
    for (int j = 0; j < m; ++j) weight_sum += params.weights[static_cast<std::size_t>(j)];
    std::vector<double> w(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        w[static_cast<std::size_t>(j)] = params.weights[static_cast<std::size_t>(j)] / weight_sum;

    std::vector<Level> levels;
    levels.reserve(static_cast<std::size_t>(m));
    levels.push_back({height, width, x, y});
    for (int j = 1; j < m; ++j) levels.push_back(downsample(levels.back()));

    std::vector<LevelStats> stats;
    stats.reserve(static_cast<std::size_t>(m));
    double value = 1.0;
    for (int j = 0; j < m; ++j) {
        stats.push_back(level_stats(levels[static_cast<std::size_t>(j)], c1, c2, c3));
        const LevelStats& st = stats.back();
        double factor = std::pow(st.c, w[static_cast<std::size_t>(j)]) *
                        std::pow(st.s_guarded, w[static_cast<std::size_t>(j)]);
        if (j == m - 1)
            factor *= std::pow(std::max(std::abs(st.l), kLuminanceFloor),
                               w[static_cast<std::size_t>(j)]);
        value *= factor;
    }

    if (!grad_x) return value;

    // d(value)/dX_j accumulated coarsest-first, pushed through the pooling
    // transpose one level at a time.
    std::vector<double> acc;
    for (int j = m - 1; j >= 0; --j) {
        const Level& lv = levels[static_cast<std::size_t>(j)];
        const LevelStats& st = stats[static_cast<std::size_t>(j)];
        const std::size_t ln = lv.x.size();
        const double inv_ln = 1.0 / static_cast<double>(ln);
        const double wj = w[static_cast<std::size_t>(j)];

        // dlog(value)/d{mu_x, sigma_x, cov} at this level.
        double d_mu = 0.0, d_sigma = 0.0, d_cov = 0.0;
        {
            const double denom_c = st.var_x + st.var_y + c2;
            const double num_c = 2.0 * st.sigma_x * st.sigma_y + c2;
            // dc/dsigma_x
            const double dc_dsx =
                (2.0 * st.sigma_y * denom_c - num_c * 2.0 * st.sigma_x) /
                (denom_c * denom_c);
            d_sigma += wj * dc_dsx / st.c;

            if (st.s > kStructureFloor) {
                const double denom_s = st.sigma_x * st.sigma_y + c3;
                d_cov += wj / (st.cov + c3);
                d_sigma += wj * (-st.sigma_y / denom_s);
            }

            if (j == m - 1 && std::abs(st.l) > kLuminanceFloor) {
                const double denom_l =
                    st.mu_x * st.mu_x + st.mu_y * st.mu_y + c1;
                const double dl_dmux =
                    (2.0 * st.mu_y * denom_l -
                     (2.0 * st.mu_x * st.mu_y + c1) * 2.0 * st.mu_x) /
                    (denom_l * denom_l);
                d_mu += wj * dl_dmux / st.l;
            }
        }

        std::vector<double> g(ln, 0.0);
        const bool sigma_live = st.sigma_x > 1e-150;
        for (std::size_t i = 0; i < ln; ++i) {
            double gi = d_mu * inv_ln;
            if (sigma_live)
                gi += d_sigma * (lv.x[i] - st.mu_x) * inv_ln / st.sigma_x;
            gi += d_cov * (lv.y[i] - st.mu_y) * inv_ln;
            g[i] = gi;
        }

        if (j == m - 1) {
            acc = std::move(g);
        } else {
            std::vector<double> widened(ln, 0.0);
            upsample_add(acc, levels[static_cast<std::size_t>(j + 1)].h,
                         levels[static_cast<std::size_t>(j + 1)].w, widened,
                         lv.h, lv.w);
            for (std::size_t i = 0; i < ln; ++i) widened[i] += g[i];
            acc = std::move(widened);
        }
    }

    grad_x->resize(n);
    for (std::size_t i = 0; i < n; ++i) (*grad_x)[i] = value * acc[i];
    return value;
}

namespace {

std::vector<double> to_double(const Frame& f) {
    return std::vector<double>(f.intensities.begin(), f.intensities.end());
}

}  // namespace

double mssim(const Frame& x, const Frame& y, const MssimParams& params) {
    if (!x.same_shape(y)) throw FrameError("mssim: frame shape mismatch");
    return mssim_d(to_double(x), to_double(y), x.height, x.width, params);
}

Frame mssim_gradient(const Frame& x, const Frame& y, const MssimParams& params) {
    if (!x.same_shape(y)) throw FrameError("mssim: frame shape mismatch");
    std::vector<double> grad;
    mssim_d(to_double(x), to_double(y), x.height, x.width, params, &grad);
    Frame g(x.height, x.width);
    for (std::size_t i = 0; i < grad.size(); ++i)
        g.intensities[i] = static_cast<float>(grad[i]);
    return g;
}

}  // namespace xrdn
