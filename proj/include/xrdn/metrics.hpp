#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn {

struct MssimParams {
    int scales = 5;
    std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

struct LossSpec {
    double alpha = 0.7;
    MssimParams mssim;
};

// Double-precision cores working on row-major buffers. The finite-difference
// test suite drives these directly; Frame wrappers below convert from float.
double mae_d(const std::vector<double>& x, const std::vector<double>& y);
void mae_gradient_d(const std::vector<double>& x, const std::vector<double>& y,
                    std::vector<double>& grad_x);

// Multiscale structural similarity with global per-scale statistics and 2x2
// mean-pool downsampling (odd trailing row/column dropped). Images smaller
// than 2^(scales-1) on a side use fewer scales with the weights renormalized.
// When grad_x is non-null it receives dMSSIM/dx.
double mssim_d(const std::vector<double>& x, const std::vector<double>& y,
               int height, int width, const MssimParams& params,
               std::vector<double>* grad_x = nullptr);

double combined_loss_d(const std::vector<double>& x, const std::vector<double>& y,
                       int height, int width, const LossSpec& spec,
                       std::vector<double>* grad_x = nullptr);

// Frame-level metric surface.
double mae(const Frame& x, const Frame& y);
double mssim(const Frame& x, const Frame& y, const MssimParams& params = {});
Frame mssim_gradient(const Frame& x, const Frame& y, const MssimParams& params = {});
double combined_loss(const Frame& x, const Frame& y, const LossSpec& spec = {});

// 10*log10(peak^2 / MSE), capped at 200 dB for identical frames.
double psnr(const Frame& x, const Frame& y, double peak = 1.0);
constexpr double kPsnrCapDb = 200.0;

// Per-pixel (hc - dn) / (hc + dn); zero-sum pixels map to 0.
Frame delta_heatmap(const Frame& hc, const Frame& dn);
// Display transform log10|delta| clipped to [-5, 0].
Frame delta_display(const Frame& delta);

}  // namespace xrdn
