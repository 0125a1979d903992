#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"
#include "xrdn/plots.hpp"

using namespace xrdn;
using namespace xrdn::report;

namespace {

std::filesystem::path tmp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "xrdn_report_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Series ramp_series(const std::string& label, double offset) {
    Series s;
    s.label = label;
    for (int i = 0; i < 10; ++i) {
        s.x.push_back(0.1 * i);
        s.y.push_back(offset + 0.5 * i);
    }
    return s;
}

}  // namespace

TEST_CASE("line plots produce self-contained svg") {
    const auto path = tmp_dir() / "lines.svg";
    PlotSpec spec;
    spec.title = "loss history";
    spec.x_label = "epoch";
    spec.y_label = "loss";
    Series a = ramp_series("train", 1.0);
    Series b = ramp_series("val", 2.0);
    b.yerr.assign(b.y.size(), 0.25);
    b.points = true;
    write_svg_lines(path.string(), spec, {a, b});

    const std::string svg = slurp(path);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("loss history") != std::string::npos);
    CHECK(svg.find("epoch") != std::string::npos);
    CHECK(svg.find("train") != std::string::npos);
    CHECK(svg.find("val") != std::string::npos);
}

TEST_CASE("log scale accepts positive data") {
    const auto path = tmp_dir() / "log.svg";
    PlotSpec spec;
    spec.log_y = true;
    Series s;
    s.label = "decay";
    for (int i = 0; i < 8; ++i) {
        s.x.push_back(i);
        s.y.push_back(std::pow(10.0, -i));
    }
    write_svg_lines(path.string(), spec, {s});
    CHECK(slurp(path).find("<polyline") != std::string::npos);
}

TEST_CASE("empty plots are rejected") {
    const auto path = tmp_dir() / "never.svg";
    CHECK_THROWS_AS(write_svg_lines(path.string(), PlotSpec{}, {}), FrameError);

    Series empty;
    empty.label = "none";
    CHECK_THROWS_AS(write_svg_lines(path.string(), PlotSpec{}, {empty}),
                    FrameError);

    Series ragged = ramp_series("r", 0.0);
    ragged.y.pop_back();
    CHECK_THROWS_AS(write_svg_lines(path.string(), PlotSpec{}, {ragged}),
                    FrameError);

    Series bad_err = ramp_series("e", 0.0);
    bad_err.yerr = {1.0};
    CHECK_THROWS_AS(write_svg_lines(path.string(), PlotSpec{}, {bad_err}),
                    FrameError);
}

TEST_CASE("histograms draw bars and overlays") {
    const auto path = tmp_dir() / "hist.svg";
    std::vector<double> centers{1.0, 2.0, 3.0, 4.0};
    std::vector<double> density{0.1, 0.4, 0.3, 0.2};
    Series overlay = ramp_series("model", 0.05);
    write_svg_histogram(path.string(), PlotSpec{}, centers, density, 1.0,
                        {overlay});
    const std::string svg = slurp(path);
    CHECK(svg.find("<rect") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("model") != std::string::npos);

    CHECK_THROWS_AS(
        write_svg_histogram(path.string(), PlotSpec{}, {}, {}, 1.0, {}),
        FrameError);
    CHECK_THROWS_AS(write_svg_histogram(path.string(), PlotSpec{}, centers,
                                        {0.1, 0.2}, 1.0, {}),
                    FrameError);
    CHECK_THROWS_AS(
        write_svg_histogram(path.string(), PlotSpec{}, centers, density, 0.0, {}),
        FrameError);
}

TEST_CASE("pgm export maps the value range") {
    Frame f(1, 3);
    f.intensities = {10.0f, 20.0f, 30.0f};
    const auto path = tmp_dir() / "frame.pgm";
    write_pgm(path.string(), f, 10.0, 30.0);

    const std::string raw = slurp(path);
    const std::string header = "P5\n3 1\n255\n";
    REQUIRE(raw.size() == header.size() + 3);
    CHECK(raw.compare(0, header.size(), header) == 0);
    const auto* px = reinterpret_cast<const unsigned char*>(raw.data() +
                                                            header.size());
    CHECK(px[0] == 0);
    CHECK(px[1] == 128);
    CHECK(px[2] == 255);
}

TEST_CASE("pgm export clamps and blanks dead pixels") {
    Frame f(1, 4);
    f.intensities = {-5.0f, 50.0f, 3.0f, 9.0f};
    f.dead[3] = 1;  // stays black even though the stored value is large
    const auto path = tmp_dir() / "clamp.pgm";
    write_pgm(path.string(), f, 0.0, 10.0);
    const std::string raw = slurp(path);
    const auto* px =
        reinterpret_cast<const unsigned char*>(raw.data() + raw.size() - 4);
    CHECK(px[0] == 0);
    CHECK(px[1] == 255);
    CHECK(px[2] == 77);   // 0.3 * 255 + 0.5, truncated
    CHECK(px[3] == 0);

    CHECK_THROWS_AS(write_pgm(path.string(), f, 5.0, 5.0), FrameError);
    Frame broken(2, 2);
    broken.dead.pop_back();
    CHECK_THROWS_AS(write_pgm(path.string(), broken, 0.0, 1.0), FrameError);
}
