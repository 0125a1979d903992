#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn {

// Dataset-wide noise constants: gamma is the median frame-integrated LC/HC
// count ratio, sigma the median per-LC-frame standard deviation, both taken
// over the calibration pairs.
struct NoiseCalibration {
    double gamma = 0.0;
    double sigma = 0.0;
};

enum class NoiseFamily { poisson, gaussian };

struct BlurSpec {
    int radius = 2;
    double std_min = 0.3;
    double std_max = 0.5;
};

NoiseCalibration calibrate(const std::vector<FramePair>& pairs);

// Per-pixel Poisson(gamma * hc). Input must be non-negative counts.
Frame add_poisson(const Frame& hc, double gamma, std::uint64_t seed);

// Adds N(0, sigma^2) to every live pixel; values may go negative.
Frame add_gaussian(const Frame& frame, double sigma, std::uint64_t seed);

// Normalized discrete Gaussian, (2*radius+1)^2 taps, row-major.
std::vector<double> make_gaussian_kernel(int radius, double stddev);

// Convolution with symmetric-reflect border handling (edge pixel repeated);
// dead pixels are re-zeroed afterwards.
Frame blur_with_kernel(const Frame& frame, const std::vector<double>& kernel,
                       int radius);

// Kernel std drawn once per call, uniform in [std_min, std_max].
Frame blur_random_kernel(const Frame& frame, const BlurSpec& spec,
                         std::uint64_t seed);

// LC = blur?(noise(hc)) with the family's calibration constant; pair id gets
// the suffix pois / gauss / pois+g / gauss+g.
FramePair make_artificial_pair(const Frame& hc, NoiseFamily family,
                               const NoiseCalibration& cal, bool blur,
                               std::uint64_t seed, const std::string& base_id,
                               const BlurSpec& blur_spec = {});

std::string noise_suffix(NoiseFamily family, bool blur);

}  // namespace xrdn
