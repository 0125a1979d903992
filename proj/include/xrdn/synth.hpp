#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn {

// Separable Gaussian rod in (h, l) whose amplitude is modulated by a Gaussian
// in k across the frame stack. Centers and widths in r.l.u., amplitude in
// counts at HC exposure.
struct RodSpec {
    double h0 = 0.0, k0 = 0.0, l0 = 0.0;
    double amplitude = 0.0;
    double sigma_h = 0.01, sigma_k = 0.02, sigma_l = 0.3;
};

// Isotropic Gaussian peak in (h, l). Off by default in the stock scenes.
struct BraggSpec {
    double h0 = 0.0, l0 = 0.0;
    double amplitude = 0.0;
    double sigma = 0.01;
};

// Annular Gaussian in pixel space; the center may lie off-frame so only an
// arc is visible.
struct RingSpec {
    double center_row = 0.0, center_col = 0.0;
    double radius_px = 50.0, width_px = 3.0;
    double amplitude = 0.0;
};

struct SpurionSpec {
    int row = 0, col = 0;
    double amplitude = 0.0;
};

struct BackgroundSpec {
    double base = 0.0;
    double grad_row = 0.0;  // counts per pixel row
    double grad_col = 0.0;  // counts per pixel column
};

struct StackSpec {
    int count = 1;
    double k_origin = 0.0;
    double k_step = 0.005;
};

struct SceneSpec {
    int height = 64, width = 64;
    AxisSpec axis_h{'h', 0.0, 0.001};    // columns
    AxisSpec axis_l{'l', 0.0, 0.015625}; // rows
    StackSpec stack;
    BackgroundSpec background;
    std::vector<RodSpec> rods;
    std::vector<BraggSpec> braggs;
    std::vector<RingSpec> rings;
    std::vector<SpurionSpec> spurions;
    double dead_fraction = 0.001;
};

struct TruePeak {
    double h0, k0, l0;
    double amplitude;
    double sigma_h, sigma_k, sigma_l;
};

struct GroundTruth {
    std::vector<Frame> clean_hc;
    std::vector<SceneSpec> scenes;               // jittered, one per pair
    std::vector<std::vector<TruePeak>> true_peaks;
    double lc_over_hc = 2.0 / 21.0;              // exposure scale
};

// Deterministic render of one stack frame. The seed fixes the dead mask only,
// so every frame of a stack rendered with one seed shares its mask. Optional
// warnings report scene features lying entirely outside the frame.
Frame render_frame(const SceneSpec& scene, int k_index, std::uint64_t seed,
                   std::vector<std::string>* warnings = nullptr);

// All stack frames with a shared dead mask.
std::vector<Frame> render_stack(const SceneSpec& scene, std::uint64_t seed,
                                std::vector<std::string>* warnings = nullptr);

// Clean HC frames with per-pair jitter: rod and spurion centers shift up to
// +-2 pixels, amplitudes scale by U[0.9, 1.1]. Each pair renders the stack's
// central frame of its own jittered scene.
GroundTruth generate_dataset(const SceneSpec& scene_template,
                             std::size_t n_pairs, double lc_over_hc,
                             std::uint64_t seed);

// 160x160, 41-frame stack centered on Q = (0.23, 0, 8.5); rod widths chosen
// so the analysis fits recover xi_a = 50 A and xi_c = 6 A.
SceneSpec default_scene();

// 64x64 single-frame variant with identical pixel steps, for training runs.
SceneSpec desk_training_scene();

void write_true_peaks_csv(const std::string& path, const GroundTruth& gt);

}  // namespace xrdn
