#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xrdn/metrics.hpp"

namespace xrdn {

double mae_d(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("mae: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s / static_cast<double>(x.size());
}

void mae_gradient_d(const std::vector<double>& x, const std::vector<double>& y,
                    std::vector<double>& grad_x) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("mae: size mismatch");
    grad_x.resize(x.size());
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        grad_x[i] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
    }
}

double combined_loss_d(const std::vector<double>& x, const std::vector<double>& y,
                       int height, int width, const LossSpec& spec,
                       std::vector<double>* grad_x) {
    std::vector<double> mssim_grad;
    const double ms = mssim_d(x, y, height, width, spec.mssim,
                              grad_x ? &mssim_grad : nullptr);
    const double ma = mae_d(x, y);
    const double loss = (1.0 - spec.alpha) * ma + spec.alpha * (1.0 - ms);
    if (grad_x) {
        std::vector<double> mae_grad;
        mae_gradient_d(x, y, mae_grad);
        grad_x->resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            (*grad_x)[i] =
                (1.0 - spec.alpha) * mae_grad[i] - spec.alpha * mssim_grad[i];
    }
    return loss;
}

namespace {

std::vector<double> to_double(const Frame& f) {
    return std::vector<double>(f.intensities.begin(), f.intensities.end());
}

void check_shapes(const Frame& x, const Frame& y, const char* op) {
    if (!x.same_shape(y))
        throw FrameError(std::string(op) + ": frame shape mismatch");
}

}  // namespace

double mae(const Frame& x, const Frame& y) {
    check_shapes(x, y, "mae");
    return mae_d(to_double(x), to_double(y));
}

double combined_loss(const Frame& x, const Frame& y, const LossSpec& spec) {
    check_shapes(x, y, "combined_loss");
    return combined_loss_d(to_double(x), to_double(y), x.height, x.width, spec);
}

double psnr(const Frame& x, const Frame& y, double peak) {
    check_shapes(x, y, "psnr");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    const std::size_t n = x.intensities.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(x.intensities[i]) - y.intensities[i];
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

Frame delta_heatmap(const Frame& hc, const Frame& dn) {
    check_shapes(hc, dn, "delta_heatmap");
    Frame out = hc;
    const std::size_t n = hc.intensities.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = hc.intensities[i];
        const double b = dn.intensities[i];
        const double sum = a + b;
        out.intensities[i] =
            sum != 0.0 ? static_cast<float>((a - b) / sum) : 0.0f;
    }
    return out;
}

Frame delta_display(const Frame& delta) {
    Frame out = delta;
    for (auto& v : out.intensities) {
        const double mag = std::abs(static_cast<double>(v));
        const double lg = mag > 0.0 ? std::log10(mag) : -5.0;
        v = static_cast<float>(std::clamp(lg, -5.0, 0.0));
    }
    return out;
}

}  // namespace xrdn
