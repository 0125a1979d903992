#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "xrdn/lattice.hpp"
#include "xrdn/rng.hpp"
#include "xrdn/synth.hpp"

using namespace xrdn;

namespace {

bool frames_identical(const Frame& a, const Frame& b) {
    return a.height == b.height && a.width == b.width &&
           a.intensities == b.intensities && a.dead == b.dead;
}

SceneSpec rod_only_default() {
    SceneSpec s = default_scene();
    s.rings.clear();
    s.spurions.clear();
    s.dead_fraction = 0.0;
    return s;
}

}  // namespace

TEST_CASE("background-only scene renders the planar ramp") {
    SceneSpec s;
    s.height = 5;
    s.width = 7;
    s.background = BackgroundSpec{100.0, 0.5, 0.25};
    s.dead_fraction = 0.0;
    const Frame f = render_frame(s, 0, 1);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 7; ++c)
            REQUIRE(f.at(r, c) ==
                    doctest::Approx(100.0 + 0.5 * r + 0.25 * c).epsilon(1e-6));
    REQUIRE(f.axes.has_value());
    CHECK(f.axes->x.label == 'h');
    CHECK(f.axes->y.label == 'l');
    REQUIRE(f.axes->stack.has_value());
    CHECK(f.axes->stack->label == 'k');
}

TEST_CASE("default scene geometry puts the rod center on-grid") {
    const SceneSpec s = default_scene();
    CHECK(s.height == 160);
    CHECK(s.width == 160);
    CHECK(s.axis_h.origin + 80 * s.axis_h.step == doctest::Approx(0.23));
    CHECK(s.axis_l.origin + 80 * s.axis_l.step == doctest::Approx(8.5));
    CHECK(s.stack.count == 41);
    CHECK(s.stack.k_origin + 20 * s.stack.k_step == doctest::Approx(0.0));

    SceneSpec bare = rod_only_default();
    bare.background = BackgroundSpec{};
    const Frame f = render_frame(bare, 20, 0);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
        if (f.intensities[i] > f.intensities[argmax]) argmax = i;
    CHECK(argmax == static_cast<std::size_t>(80) * 160 + 80);
    CHECK(f.intensities[argmax] == doctest::Approx(120.0).epsilon(1e-6));
}

TEST_CASE("desk scene is the 64x64 counterpart") {
    const SceneSpec s = desk_training_scene();
    CHECK(s.height == 64);
    CHECK(s.width == 64);
    CHECK(s.stack.count == 1);
    CHECK(s.axis_h.step == default_scene().axis_h.step);
    CHECK(s.axis_l.step == default_scene().axis_l.step);
    CHECK(s.axis_h.origin + 32 * s.axis_h.step == doctest::Approx(0.23));
    CHECK(s.axis_l.origin + 32 * s.axis_l.step == doctest::Approx(8.5));
}

TEST_CASE("stack integral of an isolated rod matches the gaussian volume") {
    SceneSpec s = rod_only_default();
    s.background = BackgroundSpec{};
    const auto frames = render_stack(s, 5);
    REQUIRE(frames.size() == 41);
    double total = 0.0;
    for (const auto& f : frames)
        for (float v : f.intensities) total += v;

    const RodSpec& rod = s.rods[0];
    const double expected = rod.amplitude * std::pow(2.0 * kPi, 1.5) *
                            rod.sigma_h * rod.sigma_k * rod.sigma_l /
                            (s.axis_h.step * s.axis_l.step * s.stack.k_step);
    CHECK(total == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("rod widths encode the target correlation lengths") {
    const SceneSpec s = default_scene();
    const RodSpec& rod = s.rods[0];
    CHECK(kLatticeA / (kPi * kFwhmFactor * rod.sigma_h) ==
          doctest::Approx(50.0).epsilon(1e-9));
    CHECK(kLatticeC / (kPi * kFwhmFactor * rod.sigma_l) ==
          doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("transverse rod profile follows the scene gaussian") {
    SceneSpec s = rod_only_default();
    s.background = BackgroundSpec{};
    const Frame f = render_frame(s, 20, 0);
    const RodSpec& rod = s.rods[0];
    for (int c = 60; c <= 100; ++c) {
        const double hq = s.axis_h.origin + c * s.axis_h.step;
        const double expect =
            120.0 * std::exp(-0.5 * std::pow((hq - rod.h0) / rod.sigma_h, 2.0));
        REQUIRE(f.at(80, c) == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("stack frames share one dead mask and step through k") {
    const SceneSpec s = default_scene();
    const auto frames = render_stack(s, 17);
    std::size_t n_dead = 0;
    for (auto d : frames[0].dead) n_dead += d;
    CHECK(n_dead == 26);  // llround(0.001 * 160 * 160)
    for (std::size_t i = 1; i < frames.size(); ++i) {
        REQUIRE(frames[i].dead == frames[0].dead);
        REQUIRE(frames[i].axes->stack->origin ==
                doctest::Approx(s.stack.k_origin +
                                static_cast<double>(i) * s.stack.k_step));
    }
}

TEST_CASE("rendering is deterministic in the seed") {
    const SceneSpec s = default_scene();
    CHECK(frames_identical(render_frame(s, 7, 3), render_frame(s, 7, 3)));
    const Frame a = render_frame(s, 7, 3);
    const Frame b = render_frame(s, 7, 4);
    CHECK(a.dead != b.dead);  // mask follows the seed
    CHECK(a.intensities != b.intensities);
}

TEST_CASE("off-frame features warn instead of failing") {
    SceneSpec s = desk_training_scene();
    s.spurions.push_back({-50, 10, 5.0});
    RodSpec far;
    far.h0 = 10.0;
    far.l0 = 8.5;
    far.amplitude = 1.0;
    s.rods.push_back(far);
    std::vector<std::string> warnings;
    const Frame f = render_frame(s, 0, 1, &warnings);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("rod 1") != std::string::npos);
    CHECK(warnings[1].find("spurion 2") != std::string::npos);
    CHECK(f.height == 64);

    std::vector<std::string> none;
    (void)render_frame(desk_training_scene(), 0, 1, &none);
    CHECK(none.empty());
}

TEST_CASE("scene validation rejects malformed specs") {
    SceneSpec s = desk_training_scene();
    s.dead_fraction = -0.1;
    CHECK_THROWS_AS((void)render_frame(s, 0, 1), FrameError);
    s = desk_training_scene();
    s.rods[0].sigma_h = 0.0;
    CHECK_THROWS_AS((void)render_frame(s, 0, 1), FrameError);
    s = desk_training_scene();
    CHECK_THROWS_AS((void)render_frame(s, 5, 1), FrameError);  // stack has 1
    CHECK_THROWS_AS((void)render_frame(s, -1, 1), FrameError);
}

TEST_CASE("spurions land on single pixels after the gaussian terms") {
    SceneSpec s;
    s.height = 8;
    s.width = 8;
    s.dead_fraction = 0.0;
    s.background = BackgroundSpec{10.0, 0.0, 0.0};
    s.spurions.push_back({3, 5, 90.0});
    const Frame f = render_frame(s, 0, 1);
    CHECK(f.at(3, 5) == doctest::Approx(100.0));
    CHECK(f.at(3, 4) == doctest::Approx(10.0));
}

TEST_CASE("generate_dataset jitters within the documented bounds") {
    const SceneSpec tmpl = desk_training_scene();
    const GroundTruth gt = generate_dataset(tmpl, 20, 2.0 / 21.0, 123);
    REQUIRE(gt.clean_hc.size() == 20);
    REQUIRE(gt.scenes.size() == 20);
    REQUIRE(gt.true_peaks.size() == 20);
    CHECK(gt.lc_over_hc == doctest::Approx(2.0 / 21.0));

    bool any_moved = false;
    for (const auto& peaks : gt.true_peaks) {
        REQUIRE(peaks.size() == 1);
        const TruePeak& p = peaks[0];
        CHECK(std::abs(p.h0 - 0.23) <= 2.0 * tmpl.axis_h.step + 1e-12);
        CHECK(std::abs(p.l0 - 8.5) <= 2.0 * tmpl.axis_l.step + 1e-12);
        CHECK(p.amplitude >= 0.9 * 120.0 - 1e-9);
        CHECK(p.amplitude <= 1.1 * 120.0 + 1e-9);
        CHECK(p.sigma_h == tmpl.rods[0].sigma_h);  // widths never jitter
        any_moved |= p.h0 != 0.23;
    }
    CHECK(any_moved);
}

TEST_CASE("recorded scenes re-render to the exact stored clean frames") {
    const GroundTruth gt = generate_dataset(desk_training_scene(), 5, 0.1, 321);
    for (std::size_t i = 0; i < gt.scenes.size(); ++i) {
        const std::uint64_t pair_seed = derive_seed(321, i);
        const Frame again = render_frame(gt.scenes[i],
                                         gt.scenes[i].stack.count / 2,
                                         derive_seed(pair_seed, 1));
        REQUIRE(frames_identical(again, gt.clean_hc[i]));
    }
}

TEST_CASE("dataset generation is seed-deterministic") {
    const SceneSpec tmpl = desk_training_scene();
    const GroundTruth a = generate_dataset(tmpl, 4, 0.1, 9);
    const GroundTruth b = generate_dataset(tmpl, 4, 0.1, 9);
    const GroundTruth c = generate_dataset(tmpl, 4, 0.1, 10);
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(frames_identical(a.clean_hc[i], b.clean_hc[i]));
        CHECK(a.true_peaks[i][0].h0 == b.true_peaks[i][0].h0);
    }
    CHECK(!frames_identical(a.clean_hc[0], c.clean_hc[0]));
}

TEST_CASE("dataset generation rejects bad arguments") {
    const SceneSpec tmpl = desk_training_scene();
    CHECK_THROWS_AS((void)generate_dataset(tmpl, 0, 0.1, 1), FrameError);
    CHECK_THROWS_AS((void)generate_dataset(tmpl, 2, 0.0, 1), FrameError);
    CHECK_THROWS_AS((void)generate_dataset(tmpl, 2, 1.5, 1), FrameError);
}

TEST_CASE("true-peak csv round trips through the documented header") {
    const GroundTruth gt = generate_dataset(desk_training_scene(), 3, 0.1, 55);
    const auto dir = std::filesystem::temp_directory_path() / "xrdn_synth_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "peaks.csv").string();
    write_true_peaks_csv(path, gt);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "pair_index,rod_index,h0,k0,l0,amplitude,sigma_h,sigma_k,sigma_l");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::filesystem::remove_all(dir);
}
