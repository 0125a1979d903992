#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "xrdn/noise.hpp"
#include "xrdn/rng.hpp"
#include "xrdn/stats.hpp"
#include "xrdn/synth.hpp"

using namespace xrdn;

namespace {

double sample_mean(const Frame& f) {
    double s = 0.0;
    for (float v : f.intensities) s += v;
    return s / static_cast<double>(f.size());
}

double sample_var(const Frame& f) {
    const double m = sample_mean(f);
    double s = 0.0;
    for (float v : f.intensities) s += (v - m) * (v - m);
    return s / static_cast<double>(f.size());
}

// Horizontal lag-1 Pearson correlation, rows treated independently.
double lag1_corr(const Frame& f) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t n = 0;
    for (int r = 0; r < f.height; ++r) {
        for (int c = 0; c + 1 < f.width; ++c) {
            const double a = f.at(r, c), b = f.at(r, c + 1);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
            ++n;
        }
    }
    const double nn = static_cast<double>(n);
    const double cov = sxy / nn - (sx / nn) * (sy / nn);
    const double va = sxx / nn - (sx / nn) * (sx / nn);
    const double vb = syy / nn - (sy / nn) * (sy / nn);
    return cov / std::sqrt(va * vb);
}

bool same_intensities(const Frame& a, const Frame& b) {
    return a.intensities.size() == b.intensities.size() &&
           std::memcmp(a.intensities.data(), b.intensities.data(),
                       a.intensities.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("poisson sampling of a zero frame stays zero") {
    const Frame hc(16, 16, 0.0f);
    const Frame lc = add_poisson(hc, 0.1, 7);
    for (float v : lc.intensities) CHECK(v == 0.0f);
}

TEST_CASE("poisson moments at large mean") {
    Frame hc(1000, 1000, 1000.0f);
    const Frame lc = add_poisson(hc, 0.1, 42);  // per-pixel mean 100
    CHECK(sample_mean(lc) == doctest::Approx(100.0).epsilon(0.01));
    CHECK(sample_var(lc) == doctest::Approx(100.0).epsilon(0.02));
    CHECK(sample_var(lc) / sample_mean(lc) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("poisson moments at small mean use the inversion path") {
    Frame hc(1000, 1000, 50.0f);
    const Frame lc = add_poisson(hc, 0.1, 43);  // per-pixel mean 5
    CHECK(sample_mean(lc) == doctest::Approx(5.0).epsilon(0.01));
    CHECK(sample_var(lc) / sample_mean(lc) == doctest::Approx(1.0).epsilon(0.03));
    for (float v : lc.intensities) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v == std::floor(v));  // integer counts
    }
}

TEST_CASE("poisson noise is deterministic in the seed") {
    Frame hc(32, 32, 200.0f);
    CHECK(same_intensities(add_poisson(hc, 0.1, 9), add_poisson(hc, 0.1, 9)));
    CHECK(!same_intensities(add_poisson(hc, 0.1, 9), add_poisson(hc, 0.1, 10)));
}

TEST_CASE("poisson input validation") {
    Frame hc(2, 2, 1.0f);
    hc.at(0, 0) = -1.0f;
    CHECK_THROWS_AS((void)add_poisson(hc, 0.1, 1), FrameError);
    Frame ok(2, 2, 1.0f);
    CHECK_THROWS_AS((void)add_poisson(ok, 0.0, 1), std::invalid_argument);
}

TEST_CASE("poisson respects the dead mask") {
    Frame hc(8, 8, 500.0f);
    hc.dead[12] = 1;
    hc.intensities[12] = 0.0f;
    const Frame lc = add_poisson(hc, 0.5, 3);
    CHECK(lc.intensities[12] == 0.0f);
    CHECK(lc.dead == hc.dead);
}

TEST_CASE("gaussian noise moments") {
    Frame in(1000, 1000, 100.0f);
    const Frame out = add_gaussian(in, 5.0, 17);
    CHECK(sample_mean(out) == doctest::Approx(100.0).epsilon(0.0005));
    CHECK(std::sqrt(sample_var(out)) == doctest::Approx(5.0).epsilon(0.01));
    CHECK(std::abs(lag1_corr(out)) < 0.01);  // white in space
}

TEST_CASE("tiny sigma leaves the frame essentially unchanged") {
    Frame in(16, 16);
    Rng rng(5);
    for (auto& v : in.intensities) v = static_cast<float>(rng.uniform(0.0, 50.0));
    const Frame out = add_gaussian(in, 1e-12, 1);
    for (std::size_t i = 0; i < in.size(); ++i)
        REQUIRE(out.intensities[i] ==
                doctest::Approx(in.intensities[i]).epsilon(1e-9));
}

TEST_CASE("gaussian noise can go negative but dead pixels stay zero") {
    Frame in(64, 64, 0.5f);
    in.dead[100] = 1;
    in.intensities[100] = 0.0f;
    const Frame out = add_gaussian(in, 10.0, 23);
    bool negative_seen = false;
    for (float v : out.intensities) negative_seen |= (v < 0.0f);
    CHECK(negative_seen);
    CHECK(out.intensities[100] == 0.0f);
    CHECK_THROWS_AS((void)add_gaussian(in, 0.0, 1), std::invalid_argument);
}

TEST_CASE("gaussian kernel shape and normalization") {
    for (int radius : {1, 2, 4}) {
        for (double std : {0.3, 0.5, 1.2}) {
            const auto k = make_gaussian_kernel(radius, std);
            const int size = 2 * radius + 1;
            REQUIRE(k.size() == static_cast<std::size_t>(size) * size);
            double sum = 0.0;
            for (double v : k) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            // symmetry and peaked center
            const std::size_t center =
                static_cast<std::size_t>(radius) * size + radius;
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    const std::size_t a = static_cast<std::size_t>(r) * size + c;
                    const std::size_t b =
                        static_cast<std::size_t>(size - 1 - r) * size +
                        (size - 1 - c);
                    REQUIRE(k[a] == doctest::Approx(k[b]).epsilon(1e-12));
                    CHECK(k[a] <= k[center]);
                }
        }
    }
    CHECK_THROWS_AS((void)make_gaussian_kernel(0, 0.4), std::invalid_argument);
    CHECK_THROWS_AS((void)make_gaussian_kernel(2, 0.0), std::invalid_argument);
}

TEST_CASE("blur of an interior impulse stamps the kernel") {
    Frame f(15, 15, 0.0f);
    f.at(7, 7) = 1.0f;
    const auto k = make_gaussian_kernel(2, 0.4);
    const Frame b = blur_with_kernel(f, k, 2);
    for (int dr = -2; dr <= 2; ++dr)
        for (int dc = -2; dc <= 2; ++dc)
            REQUIRE(b.at(7 + dr, 7 + dc) ==
                    doctest::Approx(k[static_cast<std::size_t>(dr + 2) * 5 +
                                      (dc + 2)])
                        .epsilon(1e-6));
    double total = 0.0;
    for (float v : b.intensities) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("blur preserves constant frames through the reflect border") {
    Frame f(9, 13, 3.25f);
    const Frame b = blur_with_kernel(f, make_gaussian_kernel(2, 0.45), 2);
    for (float v : b.intensities)
        REQUIRE(v == doctest::Approx(3.25).epsilon(1e-6));
}

TEST_CASE("blur matches a dense reflect-border reference") {
    Frame f(12, 9);
    Rng rng(31);
    for (auto& v : f.intensities) v = static_cast<float>(rng.uniform01());
    const int radius = 2;
    const auto k = make_gaussian_kernel(radius, 0.4);
    const Frame b = blur_with_kernel(f, k, radius);

    auto reflect = [](int i, int n) {
        if (i < 0) return -1 - i;
        if (i >= n) return 2 * n - 1 - i;
        return i;
    };
    for (int r = 0; r < f.height; ++r) {
        for (int c = 0; c < f.width; ++c) {
            double acc = 0.0;
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc)
                    acc += k[static_cast<std::size_t>(dr + radius) * 5 +
                             (dc + radius)] *
                           f.at(reflect(r + dr, f.height),
                                reflect(c + dc, f.width));
            REQUIRE(b.at(r, c) == doctest::Approx(acc).epsilon(1e-5));
        }
    }
}

TEST_CASE("blur re-zeroes dead pixels") {
    Frame f(8, 8, 2.0f);
    f.dead[27] = 1;
    f.intensities[27] = 0.0f;
    const Frame b = blur_with_kernel(f, make_gaussian_kernel(2, 0.4), 2);
    CHECK(b.intensities[27] == 0.0f);
    CHECK_THROWS_AS((void)blur_with_kernel(f, std::vector<double>(9, 1.0), 2),
                    std::invalid_argument);
}

TEST_CASE("blurred white noise gains the kernel's lag-1 correlation") {
    Frame zero(1000, 1000, 0.0f);
    const Frame noise = add_gaussian(zero, 1.0, 57);
    const int radius = 2;
    const auto k = make_gaussian_kernel(radius, 0.4);
    const Frame b = blur_with_kernel(noise, k, radius);

    const int size = 2 * radius + 1;
    double num = 0.0, den = 0.0;
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double v = k[static_cast<std::size_t>(r) * size + c];
            den += v * v;
            if (c + 1 < size)
                num += v * k[static_cast<std::size_t>(r) * size + c + 1];
        }
    }
    CHECK(lag1_corr(b) == doctest::Approx(num / den).epsilon(0.1));
    CHECK(std::abs(lag1_corr(noise)) < 0.01);
}

TEST_CASE("random-kernel blur pins its std at the interval edge") {
    Frame f(12, 12);
    Rng rng(3);
    for (auto& v : f.intensities) v = static_cast<float>(rng.uniform01());
    BlurSpec spec;
    spec.radius = 2;
    spec.std_min = spec.std_max = 0.4;
    const Frame a = blur_random_kernel(f, spec, 99);
    const Frame b = blur_with_kernel(f, make_gaussian_kernel(2, 0.4), 2);
    CHECK(same_intensities(a, b));
    CHECK(same_intensities(blur_random_kernel(f, spec, 99),
                           blur_random_kernel(f, spec, 99)));

    BlurSpec bad;
    bad.radius = 1;
    bad.std_min = 0.5;
    bad.std_max = 1.5;  // wider than the support
    CHECK_THROWS_AS((void)blur_random_kernel(f, bad, 1), std::invalid_argument);
}

TEST_CASE("calibration of a single pair") {
    FramePair p;
    p.pair_id = "p0";
    p.lc = Frame(1, 2);
    p.lc.intensities = {50.0f, 150.0f};  // sum 200, population std 50
    p.hc = Frame(1, 2, 1000.0f);         // sum 2000
    const NoiseCalibration cal = calibrate({p});
    CHECK(cal.gamma == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cal.sigma == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("calibration takes medians over pairs") {
    auto make = [](double ratio, double spread, const std::string& id) {
        FramePair p;
        p.pair_id = id;
        p.lc = Frame(1, 2);
        p.lc.intensities = {static_cast<float>(100.0 * ratio - spread),
                            static_cast<float>(100.0 * ratio + spread)};
        p.hc = Frame(1, 2, 100.0f);  // sum 200
        return p;
    };
    // ratios 0.08 / 0.12 / 0.10, lc stds 1 / 2 / 3
    const std::vector<FramePair> pairs = {make(0.08, 1.0, "a"),
                                          make(0.12, 2.0, "b"),
                                          make(0.10, 3.0, "c")};
    const NoiseCalibration cal = calibrate(pairs);
    CHECK(cal.gamma == doctest::Approx(0.10).epsilon(1e-9));
    CHECK(cal.sigma == doctest::Approx(2.0).epsilon(1e-9));

    // even count averages the central order statistics
    const std::vector<FramePair> two = {make(0.08, 1.0, "a"),
                                        make(0.12, 3.0, "b")};
    const NoiseCalibration cal2 = calibrate(two);
    CHECK(cal2.gamma == doctest::Approx(0.10).epsilon(1e-9));
    CHECK(cal2.sigma == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("calibration failure modes name the offending pair") {
    FramePair zero_hc;
    zero_hc.pair_id = "bad-pair";
    zero_hc.lc = Frame(1, 2, 1.0f);
    zero_hc.hc = Frame(1, 2, 0.0f);
    try {
        (void)calibrate({zero_hc});
        FAIL("expected FrameError");
    } catch (const FrameError& e) {
        CHECK(std::string(e.what()).find("bad-pair") != std::string::npos);
    }
    CHECK_THROWS_AS((void)calibrate({}), FrameError);
}

TEST_CASE("calibration recovers the generating ratio on synthetic pairs") {
    const double gamma = 2.0 / 21.0;
    std::vector<FramePair> pairs;
    for (int i = 0; i < 8; ++i) {
        SceneSpec scene = desk_training_scene();
        Frame hc = render_frame(scene, 0, derive_seed(400, i));
        FramePair p;
        p.pair_id = "d" + std::to_string(i);
        p.lc = add_poisson(hc, gamma, derive_seed(500, i));
        p.hc = std::move(hc);
        pairs.push_back(std::move(p));
    }
    const NoiseCalibration cal = calibrate(pairs);
    CHECK(cal.gamma == doctest::Approx(gamma).epsilon(0.05));
    CHECK(cal.sigma > 0.0);
}

TEST_CASE("artificial pairs compose documented primitives") {
    SceneSpec scene = desk_training_scene();
    const Frame hc = render_frame(scene, 0, 11);
    NoiseCalibration cal;
    cal.gamma = 0.095;
    cal.sigma = 1.3;
    const BlurSpec spec;

    SUBCASE("poisson without blur") {
        const FramePair p = make_artificial_pair(hc, NoiseFamily::poisson, cal,
                                                 false, 77, "base");
        CHECK(p.pair_id == "base-pois");
        CHECK(same_intensities(p.hc, hc));
        CHECK(same_intensities(p.lc,
                               add_poisson(hc, cal.gamma, derive_seed(77, 0))));
    }
    SUBCASE("poisson with blur") {
        const FramePair p = make_artificial_pair(hc, NoiseFamily::poisson, cal,
                                                 true, 77, "base", spec);
        CHECK(p.pair_id == "base-pois+g");
        const Frame expect = blur_random_kernel(
            add_poisson(hc, cal.gamma, derive_seed(77, 0)), spec,
            derive_seed(77, 1));
        CHECK(same_intensities(p.lc, expect));
    }
    SUBCASE("gaussian with blur scales the clean frame first") {
        const FramePair p = make_artificial_pair(hc, NoiseFamily::gaussian, cal,
                                                 true, 77, "base", spec);
        CHECK(p.pair_id == "base-gauss+g");
        Frame scaled = hc;
        for (auto& v : scaled.intensities)
            v = static_cast<float>(static_cast<double>(v) * cal.gamma);
        const Frame expect = blur_random_kernel(
            add_gaussian(scaled, cal.sigma, derive_seed(77, 0)), spec,
            derive_seed(77, 1));
        CHECK(same_intensities(p.lc, expect));
    }
    SUBCASE("suffix table") {
        CHECK(noise_suffix(NoiseFamily::poisson, false) == "pois");
        CHECK(noise_suffix(NoiseFamily::poisson, true) == "pois+g");
        CHECK(noise_suffix(NoiseFamily::gaussian, false) == "gauss");
        CHECK(noise_suffix(NoiseFamily::gaussian, true) == "gauss+g");
    }
}

TEST_CASE("pairs built from different seeds carry uncorrelated noise") {
    Frame hc(64, 64, 400.0f);
    NoiseCalibration cal;
    cal.gamma = 0.25;
    cal.sigma = 1.0;
    const FramePair a =
        make_artificial_pair(hc, NoiseFamily::poisson, cal, false, 1, "x");
    const FramePair b =
        make_artificial_pair(hc, NoiseFamily::poisson, cal, false, 2, "x");
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(hc.size());
    for (std::size_t i = 0; i < hc.size(); ++i) {
        const double u = a.lc.intensities[i], v = b.lc.intensities[i];
        sx += u;
        sy += v;
        sxx += u * u;
        syy += v * v;
        sxy += u * v;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) *
                                        (syy / n - (sy / n) * (sy / n)));
    CHECK(std::abs(corr) < 0.05);
}
