#include "xrdn/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "xrdn/rng.hpp"
#include "xrdn/stats.hpp"

namespace xrdn {

NoiseCalibration calibrate(const std::vector<FramePair>& pairs) {
    if (pairs.empty())
        throw FrameError("calibrate: no pairs");

    std::vector<double> ratios;
    std::vector<double> stds;
    ratios.reserve(pairs.size());
    stds.reserve(pairs.size());

    for (const auto& p : pairs) {
        double lc_sum = 0.0, hc_sum = 0.0;
        for (float v : p.lc.intensities) lc_sum += v;
        for (float v : p.hc.intensities) hc_sum += v;
        if (hc_sum <= 0.0)
            throw FrameError("calibrate: zero HC integral in pair " + p.pair_id);
        ratios.push_back(lc_sum / hc_sum);

        std::vector<double> live;
        live.reserve(p.lc.intensities.size());
        for (std::size_t i = 0; i < p.lc.intensities.size(); ++i)
            if (!p.lc.is_dead(i)) live.push_back(p.lc.intensities[i]);
        if (live.empty())
            throw FrameError("calibrate: no live pixels in pair " + p.pair_id);
        stds.push_back(population_std(live));
    }

    NoiseCalibration cal;
    cal.gamma = median(std::move(ratios));
    cal.sigma = median(std::move(stds));
    if (!(cal.gamma > 0.0) || cal.gamma > 1.0)
        throw FrameError("calibrate: gamma " + std::to_string(cal.gamma) +
                         " outside (0, 1]");
    if (!(cal.sigma > 0.0))
        throw FrameError("calibrate: non-positive sigma");
    return cal;
}

Frame add_poisson(const Frame& hc, double gamma, std::uint64_t seed) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("add_poisson: gamma must be positive");
    Rng rng(seed);
    Frame out = hc;
    const std::size_t n = hc.intensities.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (hc.is_dead(i)) {
            out.intensities[i] = 0.0f;
            continue;
        }
        const float v = hc.intensities[i];
        if (v < 0.0f)
            throw FrameError("add_poisson: negative input intensity");
        out.intensities[i] =
            static_cast<float>(rng.poisson(gamma * static_cast<double>(v)));
    }
    return out;
}

Frame add_gaussian(const Frame& frame, double sigma, std::uint64_t seed) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("add_gaussian: sigma must be positive");
    Rng rng(seed);
    Frame out = frame;
    const std::size_t n = frame.intensities.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (frame.is_dead(i)) {
            out.intensities[i] = 0.0f;
            continue;
        }
        out.intensities[i] =
            static_cast<float>(frame.intensities[i] + rng.normal(0.0, sigma));
    }
    return out;
}

std::vector<double> make_gaussian_kernel(int radius, double stddev) {
    if (radius < 1) throw std::invalid_argument("kernel radius must be >= 1");
    if (!(stddev > 0.0)) throw std::invalid_argument("kernel std must be > 0");
    const int size = 2 * radius + 1;
    std::vector<double> k(static_cast<std::size_t>(size) * size);
    double sum = 0.0;
    for (int r = -radius; r <= radius; ++r) {
        for (int c = -radius; c <= radius; ++c) {
            const double v =
                std::exp(-(r * r + c * c) / (2.0 * stddev * stddev));
            k[static_cast<std::size_t>(r + radius) * size + (c + radius)] = v;
            sum += v;
        }
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

inline int reflect_index(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

}  // namespace

Frame blur_with_kernel(const Frame& frame, const std::vector<double>& kernel,
                       int radius) {
    const int size = 2 * radius + 1;
    if (kernel.size() != static_cast<std::size_t>(size) * size)
        throw std::invalid_argument("kernel size does not match radius");
    Frame out = frame;
    for (int r = 0; r < frame.height; ++r) {
        for (int c = 0; c < frame.width; ++c) {
            double acc = 0.0;
            for (int dr = -radius; dr <= radius; ++dr) {
                const int rr = reflect_index(r + dr, frame.height);
                for (int dc = -radius; dc <= radius; ++dc) {
                    const int cc = reflect_index(c + dc, frame.width);
                    acc += kernel[static_cast<std::size_t>(dr + radius) * size +
                                  (dc + radius)] *
                           frame.at(rr, cc);
                }
            }
            out.at(r, c) = static_cast<float>(acc);
        }
    }
    zero_dead(out);
    return out;
}

Frame blur_random_kernel(const Frame& frame, const BlurSpec& spec,
                         std::uint64_t seed) {
    if (spec.radius < 1 || !(spec.std_min > 0.0) ||
        !(spec.std_max >= spec.std_min) ||
        spec.std_max > static_cast<double>(spec.radius))
        throw std::invalid_argument("invalid blur spec");
    Rng rng(seed);
    const double stddev = rng.uniform(spec.std_min, spec.std_max);
    return blur_with_kernel(frame, make_gaussian_kernel(spec.radius, stddev),
                            spec.radius);
}

std::string noise_suffix(NoiseFamily family, bool blur) {
    std::string s = family == NoiseFamily::poisson ? "pois" : "gauss";
    if (blur) s += "+g";
    return s;
}

FramePair make_artificial_pair(const Frame& hc, NoiseFamily family,
                               const NoiseCalibration& cal, bool blur,
                               std::uint64_t seed, const std::string& base_id,
                               const BlurSpec& blur_spec) {
    const std::uint64_t noise_seed = derive_seed(seed, 0);
    const std::uint64_t blur_seed = derive_seed(seed, 1);

    Frame lc;
    if (family == NoiseFamily::poisson) {
        lc = add_poisson(hc, cal.gamma, noise_seed);
    } else {
        lc = hc;
        for (auto& v : lc.intensities)
            v = static_cast<float>(static_cast<double>(v) * cal.gamma);
        lc = add_gaussian(lc, cal.sigma, noise_seed);
    }
    if (blur) lc = blur_random_kernel(lc, blur_spec, blur_seed);

    FramePair pair;
    pair.lc = std::move(lc);
    pair.hc = hc;
    pair.pair_id = base_id + "-" + noise_suffix(family, blur);
    return pair;
}

}  // namespace xrdn
