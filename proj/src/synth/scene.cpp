#include "xrdn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xrdn/lattice.hpp"
#include "xrdn/rng.hpp"

namespace xrdn {

namespace {

double gauss(double d, double sigma) {
    const double z = d / sigma;
    return std::exp(-0.5 * z * z);
}

struct Range {
    double lo, hi;
    bool contains_within(double center, double margin) const {
        return center + margin >= lo && center - margin <= hi;
    }
};

Range axis_range(const AxisSpec& a, int count) {
    const double first = a.origin;
    const double last = a.origin + (count - 1) * a.step;
    return {std::min(first, last), std::max(first, last)};
}

void check_scene(const SceneSpec& s) {
    if (s.height <= 0 || s.width <= 0)
        throw FrameError("scene: non-positive frame dimensions");
    if (s.stack.count < 1) throw FrameError("scene: empty frame stack");
    if (s.axis_h.step == 0.0 || s.axis_l.step == 0.0 || s.stack.k_step == 0.0)
        throw FrameError("scene: zero axis step");
    if (s.dead_fraction < 0.0 || s.dead_fraction >= 1.0)
        throw FrameError("scene: dead fraction outside [0, 1)");
    for (const auto& r : s.rods)
        if (r.amplitude < 0.0 || r.sigma_h <= 0.0 || r.sigma_k <= 0.0 ||
            r.sigma_l <= 0.0)
            throw FrameError("scene: invalid rod parameters");
    for (const auto& b : s.braggs)
        if (b.amplitude < 0.0 || b.sigma <= 0.0)
            throw FrameError("scene: invalid bragg parameters");
    for (const auto& r : s.rings)
        if (r.amplitude < 0.0 || r.width_px <= 0.0 || r.radius_px <= 0.0)
            throw FrameError("scene: invalid ring parameters");
    for (const auto& p : s.spurions)
        if (p.amplitude < 0.0) throw FrameError("scene: negative spurion");
}

void collect_warnings(const SceneSpec& s, std::vector<std::string>* out) {
    if (!out) return;
    const Range hr = axis_range(s.axis_h, s.width);
    const Range lr = axis_range(s.axis_l, s.height);
    for (std::size_t i = 0; i < s.rods.size(); ++i) {
        const auto& r = s.rods[i];
        if (!hr.contains_within(r.h0, 3.0 * r.sigma_h) ||
            !lr.contains_within(r.l0, 3.0 * r.sigma_l))
            out->push_back("rod " + std::to_string(i) + " lies outside the frame");
    }
    for (std::size_t i = 0; i < s.braggs.size(); ++i) {
        const auto& b = s.braggs[i];
        if (!hr.contains_within(b.h0, 3.0 * b.sigma) ||
            !lr.contains_within(b.l0, 3.0 * b.sigma))
            out->push_back("bragg " + std::to_string(i) + " lies outside the frame");
    }
    for (std::size_t i = 0; i < s.rings.size(); ++i) {
        const auto& g = s.rings[i];
        const double cr = std::clamp(g.center_row, 0.0, double(s.height - 1));
        const double cc = std::clamp(g.center_col, 0.0, double(s.width - 1));
        const double dmin = std::hypot(cr - g.center_row, cc - g.center_col);
        double dmax = 0.0;
        for (int corner = 0; corner < 4; ++corner) {
            const double rr = (corner & 1) ? s.height - 1 : 0;
            const double col = (corner & 2) ? s.width - 1 : 0;
            dmax = std::max(dmax, std::hypot(rr - g.center_row, col - g.center_col));
        }
        if (g.radius_px + 3.0 * g.width_px < dmin ||
            g.radius_px - 3.0 * g.width_px > dmax)
            out->push_back("ring " + std::to_string(i) + " lies outside the frame");
    }
    for (std::size_t i = 0; i < s.spurions.size(); ++i) {
        const auto& p = s.spurions[i];
        if (p.row < 0 || p.row >= s.height || p.col < 0 || p.col >= s.width)
            out->push_back("spurion " + std::to_string(i) + " lies outside the frame");
    }
}

std::vector<std::uint8_t> draw_dead_mask(const SceneSpec& s, std::uint64_t seed) {
    const std::size_t n =
        static_cast<std::size_t>(s.height) * static_cast<std::size_t>(s.width);
    std::vector<std::uint8_t> mask(n, 0);
    const std::size_t n_dead = static_cast<std::size_t>(
        std::llround(s.dead_fraction * static_cast<double>(n)));
    if (n_dead == 0) return mask;

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t d = 0; d < n_dead; ++d) {
        const std::size_t j =
            d + static_cast<std::size_t>(rng.uniform_below(n - d));
        std::swap(idx[d], idx[j]);
        mask[idx[d]] = 1;
    }
    return mask;
}

}  // namespace

Frame render_frame(const SceneSpec& scene, int k_index, std::uint64_t seed,
                   std::vector<std::string>* warnings) {
    check_scene(scene);
    if (k_index < 0 || k_index >= scene.stack.count)
        throw FrameError("render_frame: k index " + std::to_string(k_index) +
                         " outside stack of " + std::to_string(scene.stack.count));
    collect_warnings(scene, warnings);

    const double k = scene.stack.k_origin + k_index * scene.stack.k_step;

    // Rod amplitude after the k modulation, fixed per frame.
    std::vector<double> rod_amp(scene.rods.size());
    for (std::size_t i = 0; i < scene.rods.size(); ++i)
        rod_amp[i] = scene.rods[i].amplitude *
                     gauss(k - scene.rods[i].k0, scene.rods[i].sigma_k);

    Frame f(scene.height, scene.width);
    for (int r = 0; r < scene.height; ++r) {
        const double lq = scene.axis_l.origin + r * scene.axis_l.step;
        for (int c = 0; c < scene.width; ++c) {
            const double hq = scene.axis_h.origin + c * scene.axis_h.step;
            double v = scene.background.base + scene.background.grad_row * r +
                       scene.background.grad_col * c;
            for (std::size_t i = 0; i < scene.rods.size(); ++i) {
                const auto& rod = scene.rods[i];
                v += rod_amp[i] * gauss(hq - rod.h0, rod.sigma_h) *
                     gauss(lq - rod.l0, rod.sigma_l);
            }
            for (const auto& b : scene.braggs)
                v += b.amplitude * gauss(hq - b.h0, b.sigma) *
                     gauss(lq - b.l0, b.sigma);
            for (const auto& g : scene.rings) {
                const double dist =
                    std::hypot(r - g.center_row, c - g.center_col);
                v += g.amplitude * gauss(dist - g.radius_px, g.width_px);
            }
            f.at(r, c) = static_cast<float>(std::max(0.0, v));
        }
    }
    for (const auto& p : scene.spurions)
        if (p.row >= 0 && p.row < scene.height && p.col >= 0 && p.col < scene.width)
            f.at(p.row, p.col) += static_cast<float>(p.amplitude);

    f.dead = draw_dead_mask(scene, seed);
    zero_dead(f);

    ReciprocalAxes axes;
    axes.x = scene.axis_h;
    axes.y = scene.axis_l;
    axes.stack = AxisSpec{'k', k, scene.stack.k_step};
    f.axes = axes;
    return f;
}

std::vector<Frame> render_stack(const SceneSpec& scene, std::uint64_t seed,
                                std::vector<std::string>* warnings) {
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(scene.stack.count));
    for (int k = 0; k < scene.stack.count; ++k)
        frames.push_back(render_frame(scene, k, seed, k == 0 ? warnings : nullptr));
    return frames;
}

GroundTruth generate_dataset(const SceneSpec& scene_template,
                             std::size_t n_pairs, double lc_over_hc,
                             std::uint64_t seed) {
    if (n_pairs < 1)
        throw FrameError("generate_dataset: need at least one pair");
    if (!(lc_over_hc > 0.0) || lc_over_hc > 1.0)
        throw FrameError("generate_dataset: exposure scale outside (0, 1]");

    GroundTruth gt;
    gt.lc_over_hc = lc_over_hc;
    gt.clean_hc.reserve(n_pairs);
    gt.scenes.reserve(n_pairs);
    gt.true_peaks.reserve(n_pairs);

    for (std::size_t i = 0; i < n_pairs; ++i) {
        const std::uint64_t pair_seed = derive_seed(seed, i);
        Rng jitter(derive_seed(pair_seed, 0));

        SceneSpec s = scene_template;
        for (auto& rod : s.rods) {
            rod.h0 += jitter.uniform(-2.0, 2.0) * s.axis_h.step;
            rod.l0 += jitter.uniform(-2.0, 2.0) * s.axis_l.step;
            rod.amplitude *= jitter.uniform(0.9, 1.1);
        }
        for (auto& p : s.spurions) {
            p.row += static_cast<int>(std::llround(jitter.uniform(-2.0, 2.0)));
            p.col += static_cast<int>(std::llround(jitter.uniform(-2.0, 2.0)));
            p.amplitude *= jitter.uniform(0.9, 1.1);
        }

        const int k_center = s.stack.count / 2;
        gt.clean_hc.push_back(
            render_frame(s, k_center, derive_seed(pair_seed, 1)));
        std::vector<TruePeak> peaks;
        for (const auto& rod : s.rods)
            peaks.push_back({rod.h0, rod.k0, rod.l0, rod.amplitude,
                             rod.sigma_h, rod.sigma_k, rod.sigma_l});
        gt.true_peaks.push_back(std::move(peaks));
        gt.scenes.push_back(std::move(s));
    }
    return gt;
}

SceneSpec default_scene() {
    SceneSpec s;
    s.height = 160;
    s.width = 160;
    s.axis_h = AxisSpec{'h', 0.15, 0.001};
    s.axis_l = AxisSpec{'l', 7.25, 0.015625};
    s.stack = StackSpec{41, -0.1, 0.005};
    s.background = BackgroundSpec{40.0, 0.02, 0.015};

    RodSpec rod;
    rod.h0 = 0.23;
    rod.k0 = 0.0;
    rod.l0 = 8.5;
    rod.amplitude = 120.0;
    rod.sigma_h = sigma_rlu_for_xi(kLatticeA, 50.0);
    rod.sigma_l = sigma_rlu_for_xi(kLatticeC, 6.0);
    rod.sigma_k = 0.02;
    s.rods.push_back(rod);

    RingSpec ring;
    ring.center_row = -60.0;
    ring.center_col = -60.0;
    ring.radius_px = 100.0;
    ring.width_px = 4.0;
    ring.amplitude = 30.0;
    s.rings.push_back(ring);

    s.spurions.push_back({30, 120, 90.0});
    s.spurions.push_back({130, 25, 70.0});
    s.dead_fraction = 0.001;
    return s;
}

SceneSpec desk_training_scene() {
    SceneSpec s;
    s.height = 64;
    s.width = 64;
    s.axis_h = AxisSpec{'h', 0.198, 0.001};
    s.axis_l = AxisSpec{'l', 8.0, 0.015625};
    s.stack = StackSpec{1, 0.0, 0.005};
    s.background = BackgroundSpec{40.0, 0.03, 0.02};

    RodSpec rod;
    rod.h0 = 0.23;
    rod.k0 = 0.0;
    rod.l0 = 8.5;
    rod.amplitude = 120.0;
    rod.sigma_h = sigma_rlu_for_xi(kLatticeA, 50.0);
    rod.sigma_l = sigma_rlu_for_xi(kLatticeC, 6.0);
    rod.sigma_k = 0.02;
    s.rods.push_back(rod);

    RingSpec ring;
    ring.center_row = -20.0;
    ring.center_col = -20.0;
    ring.radius_px = 45.0;
    ring.width_px = 4.0;
    ring.amplitude = 30.0;
    s.rings.push_back(ring);

    s.spurions.push_back({10, 50, 90.0});
    s.spurions.push_back({52, 12, 70.0});
    s.dead_fraction = 0.001;
    return s;
}

void write_true_peaks_csv(const std::string& path, const GroundTruth& gt) {
    std::ofstream out(path);
    if (!out) throw FrameError("cannot write true-peak csv: " + path);
    out << "pair_index,rod_index,h0,k0,l0,amplitude,sigma_h,sigma_k,sigma_l\n";
    out.precision(12);
    for (std::size_t i = 0; i < gt.true_peaks.size(); ++i) {
        for (std::size_t r = 0; r < gt.true_peaks[i].size(); ++r) {
            const auto& p = gt.true_peaks[i][r];
            out << i << ',' << r << ',' << p.h0 << ',' << p.k0 << ',' << p.l0
                << ',' << p.amplitude << ',' << p.sigma_h << ',' << p.sigma_k
                << ',' << p.sigma_l << '\n';
        }
    }
}

}  // namespace xrdn
