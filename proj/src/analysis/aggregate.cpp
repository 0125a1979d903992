#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xrdn/analysis.hpp"
#include "xrdn/analysis/simplex.hpp"
#include "xrdn/csv.hpp"
#include "xrdn/stats.hpp"

namespace xrdn::analysis {

namespace {
constexpr double kAggPi = 3.14159265358979323846;
}

ScoreSummary aggregate_scores(const std::vector<ScoreRow>& rows) {
    if (rows.size() < 10)
        throw FrameError("aggregate_scores: need at least 10 rows");

    std::vector<double> psnr, mssim, quality;
    psnr.reserve(rows.size());
    for (const ScoreRow& r : rows) {
        psnr.push_back(r.psnr);
        mssim.push_back(r.mssim);
        quality.push_back(r.quality);
    }

    ScoreSummary s;
    s.count = static_cast<int>(rows.size());
    s.mssim_median = median(mssim);
    s.quality_median = median(quality);

    const double n = static_cast<double>(psnr.size());
    const double iqr = quantile(psnr, 0.75) - quantile(psnr, 0.25);
    const double width = 2.0 * iqr * std::pow(n, -1.0 / 3.0);
    const auto [mn_it, mx_it] = std::minmax_element(psnr.begin(), psnr.end());

    bool fitted = false;
    if (width > 0.0 && *mx_it > *mn_it) {
        const int nbins = std::min(
            4096, static_cast<int>(std::ceil((*mx_it - *mn_it) / width)));
        std::vector<double> density(static_cast<std::size_t>(nbins), 0.0);
        for (double v : psnr) {
            int b = static_cast<int>((v - *mn_it) / width);
            b = std::clamp(b, 0, nbins - 1);
            density[static_cast<std::size_t>(b)] += 1.0;
        }
        for (double& d : density) d /= n * width;
        s.psnr_bin_center.resize(density.size());
        for (int b = 0; b < nbins; ++b)
            s.psnr_bin_center[static_cast<std::size_t>(b)] =
                *mn_it + (b + 0.5) * width;
        s.psnr_bin_density = density;

        auto ssr = [&](const std::vector<double>& p) {
            const double sigma = std::max(std::abs(p[1]), 1e-300);
            double acc = 0.0;
            for (std::size_t i = 0; i < density.size(); ++i) {
                const double z = (s.psnr_bin_center[i] - p[0]) / sigma;
                const double model =
                    std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kAggPi));
                const double r = density[i] - model;
                acc += r * r;
            }
            return acc;
        };

        const double sd = population_std(psnr);
        const std::vector<double> x0 = {median(psnr), std::max(sd, width)};
        const std::vector<double> step = {0.5 * std::max(sd, width),
                                          0.2 * std::max(sd, width)};
        const SimplexResult res = nelder_mead(ssr, x0, step, 1e-8, 2000);
        if (res.converged && std::isfinite(res.x[0])) {
            s.psnr_mu = res.x[0];
            s.psnr_sigma = std::abs(res.x[1]);
            s.psnr_from_fit = true;
            fitted = true;
        }
    }
    if (!fitted) {
        s.psnr_mu = median(psnr);
        s.psnr_sigma = 0.0;
        s.psnr_from_fit = false;
    }
    return s;
}

void write_scores_csv(const std::string& path,
                      const std::vector<ScoreRow>& rows) {
    CsvTable t;
    t.header = {"pair_id", "psnr_db", "mssim", "quality"};
    for (const ScoreRow& r : rows)
        t.rows.push_back({r.pair_id, format_double(r.psnr),
                          format_double(r.mssim), format_double(r.quality)});
    write_csv(path, t);
}

std::vector<ScoreRow> read_scores_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.header !=
        std::vector<std::string>{"pair_id", "psnr_db", "mssim", "quality"})
        throw FrameError("scores csv: unexpected header in " + path);
    std::vector<ScoreRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        if (row.size() != 4) throw FrameError("scores csv: bad row in " + path);
        rows.push_back({row[0], std::stod(row[1]), std::stod(row[2]),
                        std::stod(row[3])});
    }
    return rows;
}

}  // namespace xrdn::analysis
