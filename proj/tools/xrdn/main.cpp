#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "xrdn/analysis.hpp"
#include "xrdn/cli/config.hpp"
#include "xrdn/csv.hpp"
#include "xrdn/dataset.hpp"
#include "xrdn/frame_io.hpp"
#include "xrdn/metrics.hpp"
#include "xrdn/nn.hpp"
#include "xrdn/noise.hpp"
#include "xrdn/normalize.hpp"
#include "xrdn/plots.hpp"
#include "xrdn/rng.hpp"
#include "xrdn/stats.hpp"
#include "xrdn/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Sub-seed roots so independent random streams never collide.
constexpr std::uint64_t kSeedSplit = 0x517;
constexpr std::uint64_t kSeedNoise = 0x5e15e;
constexpr std::uint64_t kSeedStack = 0x57ac;

xrdn::SceneSpec make_scene(const xrdn::cli::RunConfig& cfg) {
    return cfg.get("scene") == "default" ? xrdn::default_scene()
                                         : xrdn::desk_training_scene();
}

struct NoiseChoice {
    xrdn::NoiseFamily family;
    bool blur;
};

NoiseChoice noise_choice(const xrdn::cli::RunConfig& cfg) {
    const std::string& n = cfg.get("noise");
    NoiseChoice c{xrdn::NoiseFamily::poisson, false};
    if (n == "gauss" || n == "gauss+g") c.family = xrdn::NoiseFamily::gaussian;
    if (n == "pois+g" || n == "gauss+g") c.blur = true;
    return c;
}

xrdn::BlurSpec blur_spec(const xrdn::cli::RunConfig& cfg) {
    xrdn::BlurSpec b;
    b.std_min = cfg.get_double("blur_min");
    b.std_max = cfg.get_double("blur_max");
    return b;
}

// Gaussian sigma matched to the poisson scale: the LC frame is gamma*hc, so
// its typical shot variance is the mean of gamma*hc over live pixels.
double auto_sigma(const std::vector<xrdn::Frame>& hc_frames, double gamma) {
    double sum = 0.0;
    std::size_t live = 0;
    for (const xrdn::Frame& f : hc_frames)
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!f.is_dead(i)) {
                sum += static_cast<double>(f.intensities[i]);
                ++live;
            }
    if (live == 0) throw xrdn::FrameError("noise sigma: no live pixels");
    return std::sqrt(std::max(gamma * sum / static_cast<double>(live), 1e-12));
}

xrdn::NoiseCalibration calibration_for(const xrdn::cli::RunConfig& cfg,
                                       const std::vector<xrdn::Frame>& hc) {
    xrdn::NoiseCalibration cal;
    cal.gamma = cfg.get_double("lc_over_hc");
    cal.sigma = cfg.get("noise_sigma") == "auto"
                    ? auto_sigma(hc, cal.gamma)
                    : cfg.get_double("noise_sigma");
    return cal;
}

xrdn::nn::NetworkSpec network_spec(const xrdn::cli::RunConfig& cfg) {
    xrdn::nn::NetworkSpec spec;
    spec.topology = cfg.get("arch") == "irunet" ? xrdn::nn::Topology::irunet
                                                : xrdn::nn::Topology::vdsr;
    spec.depth = cfg.get_int("depth");
    spec.filters = cfg.get_int("filters");
    return spec;
}

xrdn::nn::TrainConfig train_config(const xrdn::cli::RunConfig& cfg) {
    xrdn::nn::TrainConfig tc;
    tc.ilr = cfg.get_double("ilr");
    tc.batch_size = cfg.get_int("batch");
    tc.epochs = cfg.get_int("epochs");
    tc.flip_probability = cfg.get_double("flip_probability");
    tc.seed = cfg.get_seed();
    return tc;
}

void prepare_out(const xrdn::cli::RunConfig& cfg, const std::string& out) {
    fs::create_directories(out);
    cfg.write_resolved((fs::path(out) / "resolved_config.txt").string());
}

std::string pad_index(std::size_t i, int width = 4) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, i);
    return buf;
}

xrdn::analysis::QPoint config_q0(const xrdn::cli::RunConfig& cfg) {
    return {cfg.get_double("q0_h"), cfg.get_double("q0_k"),
            cfg.get_double("q0_l")};
}

xrdn::analysis::ScanWindow config_window(const xrdn::cli::RunConfig& cfg) {
    return {cfg.get_double("window_h"), cfg.get_double("window_k"),
            cfg.get_double("window_l")};
}

int cmd_synth(const xrdn::cli::RunConfig& cfg, const std::string& out,
              bool stack_mode) {
    prepare_out(cfg, out);
    const xrdn::SceneSpec scene = make_scene(cfg);
    const std::uint64_t seed = cfg.get_seed();
    const double gamma = cfg.get_double("lc_over_hc");
    const NoiseChoice nc = noise_choice(cfg);
    const xrdn::BlurSpec bs = blur_spec(cfg);

    if (stack_mode) {
        std::vector<std::string> warnings;
        const std::vector<xrdn::Frame> stack =
            xrdn::render_stack(scene, xrdn::derive_seed(seed, kSeedStack),
                               &warnings);
        for (const std::string& w : warnings)
            std::cerr << "warning: " << w << "\n";
        const xrdn::NoiseCalibration cal = calibration_for(cfg, stack);
        fs::create_directories(fs::path(out) / "stack" / "hc");
        fs::create_directories(fs::path(out) / "stack" / "lc");
        for (std::size_t i = 0; i < stack.size(); ++i) {
            const std::string name = "frame_" + pad_index(i, 3) + ".dfrm";
            xrdn::save_frame(stack[i],
                             (fs::path(out) / "stack" / "hc" / name).string());
            const xrdn::FramePair p = xrdn::make_artificial_pair(
                stack[i], nc.family, cal, nc.blur,
                xrdn::derive_seed(xrdn::derive_seed(seed, kSeedNoise), i),
                "frame_" + pad_index(i, 3), bs);
            xrdn::save_frame(p.lc,
                             (fs::path(out) / "stack" / "lc" / name).string());
        }
        std::cout << "wrote " << stack.size() << " stack frames (hc + lc, "
                  << cfg.get("noise") << ") under " << out << "/stack\n";
        return kExitOk;
    }

    const std::size_t n = static_cast<std::size_t>(cfg.get_int("pairs"));
    const xrdn::GroundTruth gt =
        xrdn::generate_dataset(scene, n, gamma, seed);
    const xrdn::NoiseCalibration cal = calibration_for(cfg, gt.clean_hc);

    xrdn::SplitFractions fr{cfg.get_double("split_train"),
                            cfg.get_double("split_val"),
                            cfg.get_double("split_test")};
    const xrdn::SplitIndices split =
        xrdn::split_dataset(n, fr, xrdn::derive_seed(seed, kSeedSplit));
    std::vector<std::string> split_of(n, "train");
    for (std::size_t i : split.val) split_of[i] = "val";
    for (std::size_t i : split.test) split_of[i] = "test";

    fs::create_directories(fs::path(out) / "frames");
    std::vector<xrdn::ManifestEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        const xrdn::FramePair pair = xrdn::make_artificial_pair(
            gt.clean_hc[i], nc.family, cal, nc.blur,
            xrdn::derive_seed(xrdn::derive_seed(seed, kSeedNoise), i),
            "pair" + pad_index(i), bs);
        const std::string lc_rel = "frames/" + pair.pair_id + "_lc.dfrm";
        const std::string hc_rel = "frames/" + pair.pair_id + "_hc.dfrm";
        xrdn::save_frame(pair.lc, (fs::path(out) / lc_rel).string());
        xrdn::save_frame(pair.hc, (fs::path(out) / hc_rel).string());
        entries.push_back({pair.pair_id, split_of[i], lc_rel, hc_rel});
    }
    xrdn::write_manifest((fs::path(out) / "manifest.csv").string(), entries);
    xrdn::write_true_peaks_csv((fs::path(out) / "truth.csv").string(), gt);
    std::cout << "wrote " << n << " pairs (" << split.train.size() << "/"
              << split.val.size() << "/" << split.test.size()
              << " train/val/test) under " << out << "\n";
    return kExitOk;
}

int cmd_noise(const xrdn::cli::RunConfig& cfg, const std::string& out,
              const std::string& hc_path, const std::string& manifest) {
    prepare_out(cfg, out);
    const std::uint64_t seed = cfg.get_seed();
    const NoiseChoice nc = noise_choice(cfg);
    const xrdn::BlurSpec bs = blur_spec(cfg);

    std::vector<xrdn::Frame> hc;
    std::vector<std::string> ids;
    std::vector<std::string> splits;
    if (!hc_path.empty()) {
        hc.push_back(xrdn::load_frame(hc_path));
        ids.push_back(fs::path(hc_path).stem().string());
        splits.push_back("train");
    } else {
        const auto entries = xrdn::read_manifest(manifest);
        const fs::path base = fs::path(manifest).parent_path();
        for (const auto& e : entries) {
            hc.push_back(xrdn::load_frame((base / e.hc_path).string()));
            ids.push_back(e.pair_id);
            splits.push_back(e.split);
        }
    }
    const xrdn::NoiseCalibration cal = calibration_for(cfg, hc);

    fs::create_directories(fs::path(out) / "frames");
    std::vector<xrdn::ManifestEntry> entries;
    for (std::size_t i = 0; i < hc.size(); ++i) {
        std::string base_id = ids[i];
        const std::size_t dash = base_id.rfind('-');
        if (dash != std::string::npos) base_id = base_id.substr(0, dash);
        const xrdn::FramePair pair = xrdn::make_artificial_pair(
            hc[i], nc.family, cal, nc.blur,
            xrdn::derive_seed(xrdn::derive_seed(seed, kSeedNoise), i), base_id,
            bs);
        const std::string lc_rel = "frames/" + pair.pair_id + "_lc.dfrm";
        const std::string hc_rel = "frames/" + pair.pair_id + "_hc.dfrm";
        xrdn::save_frame(pair.lc, (fs::path(out) / lc_rel).string());
        xrdn::save_frame(pair.hc, (fs::path(out) / hc_rel).string());
        entries.push_back({pair.pair_id, splits[i], lc_rel, hc_rel});
    }
    xrdn::write_manifest((fs::path(out) / "manifest.csv").string(), entries);
    std::cout << "renoised " << hc.size() << " frames with "
              << cfg.get("noise") << " under " << out << "\n";
    return kExitOk;
}

int cmd_train(const xrdn::cli::RunConfig& cfg, const std::string& out,
              const std::string& manifest) {
    prepare_out(cfg, out);
    const xrdn::nn::NetworkSpec spec = network_spec(cfg);
    const xrdn::nn::TrainConfig tc = train_config(cfg);
    const std::vector<xrdn::FramePair> train_pairs =
        xrdn::load_split(manifest, "train");
    const std::vector<xrdn::FramePair> val_pairs =
        xrdn::load_split(manifest, "val");

    const xrdn::nn::TrainResult result =
        xrdn::nn::train(spec, tc, {}, train_pairs, val_pairs);

    xrdn::nn::save_checkpoint((fs::path(out) / "checkpoint.dnet").string(),
                              spec, result.best_params);
    xrdn::nn::write_history_csv((fs::path(out) / "history.csv").string(),
                                result.history);
    if (result.diverged) {
        std::cerr << "training diverged; best checkpoint (epoch "
                  << result.best_epoch << ") retained\n";
        return kExitNumerical;
    }
    std::cout << "trained " << cfg.get("arch") << " for " << tc.epochs
              << " epochs; best val loss "
              << xrdn::format_double(result.best_val_loss, 6) << " at epoch "
              << result.best_epoch << "\n";
    return kExitOk;
}

int cmd_denoise(const xrdn::cli::RunConfig& cfg, const std::string& out,
                const std::string& checkpoint,
                const std::vector<std::string>& inputs,
                const std::string& manifest, const std::string& split) {
    prepare_out(cfg, out);
    const xrdn::nn::Checkpoint ck = xrdn::nn::load_checkpoint(checkpoint);
    std::size_t count = 0;
    if (!inputs.empty()) {
        for (const std::string& path : inputs) {
            const xrdn::Frame lc = xrdn::load_frame(path);
            const xrdn::Frame dn = xrdn::nn::denoise(ck.spec, ck.params, lc);
            const std::string name = fs::path(path).stem().string() + "_do.dfrm";
            xrdn::save_frame(dn, (fs::path(out) / name).string());
            ++count;
        }
    } else {
        for (const xrdn::FramePair& p : xrdn::load_split(manifest, split)) {
            const xrdn::Frame dn = xrdn::nn::denoise(ck.spec, ck.params, p.lc);
            xrdn::save_frame(
                dn, (fs::path(out) / (p.pair_id + "_do.dfrm")).string());
            ++count;
        }
    }
    std::cout << "denoised " << count << " frames into " << out << "\n";
    return kExitOk;
}

int cmd_eval(const xrdn::cli::RunConfig& cfg, const std::string& out,
             const std::string& checkpoint, const std::string& manifest,
             const std::string& split) {
    prepare_out(cfg, out);
    const xrdn::nn::Checkpoint ck = xrdn::nn::load_checkpoint(checkpoint);
    const std::vector<xrdn::FramePair> pairs = xrdn::load_split(manifest, split);
    if (pairs.empty()) throw xrdn::FrameError("eval: split is empty");

    const xrdn::LossSpec loss;
    std::vector<xrdn::analysis::ScoreRow> rows, noisy_rows;
    std::size_t heatmaps = 0;
    for (const xrdn::FramePair& p : pairs) {
        const xrdn::Frame dn = xrdn::nn::denoise(ck.spec, ck.params, p.lc);
        xrdn::Frame dn_n = dn, hc_n = p.hc, lc_n = p.lc;
        xrdn::normalize_minmax(dn_n, p.pair_id + ".do");
        xrdn::normalize_minmax(hc_n, p.pair_id + ".hc");
        xrdn::normalize_minmax(lc_n, p.pair_id + ".lc");

        rows.push_back({p.pair_id, xrdn::psnr(dn_n, hc_n),
                        xrdn::mssim(dn_n, hc_n),
                        1.0 - xrdn::combined_loss(dn_n, hc_n, loss)});
        noisy_rows.push_back({p.pair_id, xrdn::psnr(lc_n, hc_n),
                              xrdn::mssim(lc_n, hc_n),
                              1.0 - xrdn::combined_loss(lc_n, hc_n, loss)});

        if (heatmaps < 4) {
            const xrdn::Frame delta = xrdn::delta_heatmap(hc_n, dn_n);
            xrdn::save_frame(
                delta,
                (fs::path(out) / ("delta_" + p.pair_id + ".dfrm")).string());
            xrdn::report::write_pgm(
                (fs::path(out) / ("delta_" + p.pair_id + ".pgm")).string(),
                xrdn::delta_display(delta), -5.0, 0.0);
            ++heatmaps;
        }
    }
    xrdn::analysis::write_scores_csv((fs::path(out) / "metrics.csv").string(),
                                     rows);
    xrdn::analysis::write_scores_csv(
        (fs::path(out) / "metrics_noisy.csv").string(), noisy_rows);

    xrdn::CsvTable summary;
    summary.header = {"key", "value"};
    auto add = [&](const std::string& k, const std::string& v) {
        summary.rows.push_back({k, v});
    };
    std::vector<double> psnrs, mssims, qualities;
    for (const auto& r : rows) {
        psnrs.push_back(r.psnr);
        mssims.push_back(r.mssim);
        qualities.push_back(r.quality);
    }
    if (rows.size() >= 10) {
        const xrdn::analysis::ScoreSummary s = xrdn::analysis::aggregate_scores(rows);
        add("psnr_mu", xrdn::format_double(s.psnr_mu));
        add("psnr_sigma", xrdn::format_double(s.psnr_sigma));
        add("psnr_from_fit", s.psnr_from_fit ? "1" : "0");
        add("mssim_median", xrdn::format_double(s.mssim_median));
        add("quality_median", xrdn::format_double(s.quality_median));
        add("count", std::to_string(s.count));
        xrdn::CsvTable hist;
        hist.header = {"bin_center", "density"};
        for (std::size_t i = 0; i < s.psnr_bin_center.size(); ++i)
            hist.rows.push_back({xrdn::format_double(s.psnr_bin_center[i]),
                                 xrdn::format_double(s.psnr_bin_density[i])});
        xrdn::write_csv((fs::path(out) / "psnr_hist.csv").string(), hist);
    } else {
        add("psnr_mu", xrdn::format_double(xrdn::median(psnrs)));
        add("psnr_sigma", "0");
        add("psnr_from_fit", "0");
        add("mssim_median", xrdn::format_double(xrdn::median(mssims)));
        add("quality_median", xrdn::format_double(xrdn::median(qualities)));
        add("count", std::to_string(rows.size()));
    }
    add("psnr_median_noisy", xrdn::format_double([&] {
            std::vector<double> v;
            for (const auto& r : noisy_rows) v.push_back(r.psnr);
            return xrdn::median(v);
        }()));
    xrdn::write_csv((fs::path(out) / "summary.csv").string(), summary);
    std::cout << "evaluated " << rows.size() << " pairs; median mssim "
              << xrdn::format_double(xrdn::median(mssims), 6) << "\n";
    return kExitOk;
}

void write_peak_fit_row(xrdn::CsvTable& t, const std::string& name,
                        const xrdn::analysis::PeakFit& f) {
    t.rows.push_back({name, xrdn::format_double(f.amplitude),
                      xrdn::format_double(f.amplitude_err),
                      xrdn::format_double(f.center),
                      xrdn::format_double(f.center_err),
                      xrdn::format_double(f.sigma),
                      xrdn::format_double(f.sigma_err),
                      xrdn::format_double(f.offset),
                      xrdn::format_double(f.offset_err),
                      f.converged ? "1" : "0"});
}

int cmd_fit(const xrdn::cli::RunConfig& cfg, const std::string& out,
            const std::vector<std::string>& hc_files,
            const std::vector<std::string>& do_files,
            const std::string& pdf_frame, const std::string& pdf_model) {
    prepare_out(cfg, out);

    if (!pdf_frame.empty()) {
        const xrdn::Frame f = xrdn::load_frame(pdf_frame);
        std::vector<xrdn::analysis::PdfModel> models;
        using PM = xrdn::analysis::PdfModel;
        if (pdf_model == "all")
            models = {PM::poisson, PM::gaussian, PM::skew_gaussian,
                      PM::poisson_conv_gaussian};
        else if (pdf_model == "poisson") models = {PM::poisson};
        else if (pdf_model == "gaussian") models = {PM::gaussian};
        else if (pdf_model == "skew_gaussian") models = {PM::skew_gaussian};
        else if (pdf_model == "poisson_conv_gaussian")
            models = {PM::poisson_conv_gaussian};
        else
            throw xrdn::cli::ConfigError("fit: unknown pdf model " + pdf_model);

        xrdn::CsvTable params;
        params.header = {"model", "p0", "p1", "p2", "reduced_chi2", "converged"};
        for (PM m : models) {
            const xrdn::analysis::PdfFit fit = xrdn::analysis::fit_pdf(f, m);
            xrdn::CsvTable hist;
            hist.header = {"bin_center", "density", "density_err",
                           "model_density"};
            for (std::size_t i = 0; i < fit.bin_center.size(); ++i)
                hist.rows.push_back(
                    {xrdn::format_double(fit.bin_center[i]),
                     xrdn::format_double(fit.bin_density[i]),
                     xrdn::format_double(fit.bin_density_err[i]),
                     xrdn::format_double(xrdn::analysis::pdf_model_density(
                         m, fit.params, fit.bin_center[i]))});
            xrdn::write_csv(
                (fs::path(out) /
                 ("pdf_" + std::string(xrdn::analysis::pdf_model_name(m)) +
                  ".csv"))
                    .string(),
                hist);
            params.rows.push_back(
                {xrdn::analysis::pdf_model_name(m),
                 xrdn::format_double(fit.params[0]),
                 xrdn::format_double(fit.params[1]),
                 fit.params.size() > 2 ? xrdn::format_double(fit.params[2]) : "",
                 xrdn::format_double(fit.reduced_chi2),
                 fit.converged ? "1" : "0"});
        }
        xrdn::write_csv((fs::path(out) / "pdf_params.csv").string(), params);
        std::cout << "fitted " << models.size() << " pdf models on "
                  << pdf_frame << "\n";
        return kExitOk;
    }

    if (hc_files.empty())
        throw xrdn::cli::ConfigError("fit: need --hc frames or --pdf-frame");

    auto load_stack = [](const std::vector<std::string>& paths) {
        std::vector<xrdn::Frame> stack;
        for (const std::string& p : paths) stack.push_back(xrdn::load_frame(p));
        return stack;
    };
    const xrdn::analysis::QPoint q0 = config_q0(cfg);
    const xrdn::analysis::ScanWindow win = config_window(cfg);
    const double flank = cfg.get_double("flank_fraction");

    auto scans_for = [&](const std::vector<xrdn::Frame>& stack,
                         const std::string& tag) {
        using xrdn::analysis::ScanAxis;
        const xrdn::analysis::ScanProjection h = xrdn::analysis::subtract_background(
            xrdn::analysis::project_scan(stack, q0, ScanAxis::h, win), flank);
        const xrdn::analysis::ScanProjection l = xrdn::analysis::subtract_background(
            xrdn::analysis::project_scan(stack, q0, ScanAxis::l, win), flank);
        xrdn::analysis::write_scan_csv(
            (fs::path(out) / ("scan_" + tag + "_h.csv")).string(), h);
        xrdn::analysis::write_scan_csv(
            (fs::path(out) / ("scan_" + tag + "_l.csv")).string(), l);
        return std::pair{xrdn::analysis::fit_gaussian_1d(h),
                         xrdn::analysis::fit_gaussian_1d(l)};
    };

    xrdn::CsvTable fits;
    fits.header = {"scan",       "amplitude", "amplitude_err", "center",
                   "center_err", "sigma",     "sigma_err",     "offset",
                   "offset_err", "converged"};
    const auto hc_stack = load_stack(hc_files);
    const auto [hc_h, hc_l] = scans_for(hc_stack, "hc");
    write_peak_fit_row(fits, "hc_h", hc_h);
    write_peak_fit_row(fits, "hc_l", hc_l);

    if (!do_files.empty()) {
        const auto do_stack = load_stack(do_files);
        const auto [do_h, do_l] = scans_for(do_stack, "do");
        write_peak_fit_row(fits, "do_h", do_h);
        write_peak_fit_row(fits, "do_l", do_l);

        const xrdn::analysis::CorrelationReport rep =
            xrdn::analysis::ratio_report(hc_h, do_h, hc_l, do_l);
        xrdn::CsvTable ratios;
        ratios.header = {"axis",     "xi_hc",        "xi_do",   "xi_ratio",
                         "xi_ratio_err", "w_hc",     "w_do",    "w_ratio",
                         "w_ratio_err",  "present"};
        auto add_axis = [&](const std::string& name,
                            const xrdn::analysis::AxisRatios& a) {
            ratios.rows.push_back({name, xrdn::format_double(a.xi_hc),
                                   xrdn::format_double(a.xi_do),
                                   xrdn::format_double(a.xi_ratio.value),
                                   xrdn::format_double(a.xi_ratio.error),
                                   xrdn::format_double(a.w_hc),
                                   xrdn::format_double(a.w_do),
                                   xrdn::format_double(a.w_ratio.value),
                                   xrdn::format_double(a.w_ratio.error),
                                   a.xi_ratio.present ? "1" : "0"});
        };
        add_axis("a", rep.a);
        add_axis("c", rep.c);
        xrdn::write_csv((fs::path(out) / "ratios.csv").string(), ratios);
    }
    xrdn::write_csv((fs::path(out) / "fits.csv").string(), fits);
    std::cout << "wrote scans and fits under " << out << "\n";
    return kExitOk;
}

int cmd_report(const std::string& out, const std::string& run_dir) {
    fs::create_directories(out);
    bool plotted = false;

    const fs::path history_path = fs::path(run_dir) / "history.csv";
    if (fs::exists(history_path)) {
        const auto rows = xrdn::nn::read_history_csv(history_path.string());
        if (rows.empty()) throw xrdn::FrameError("report: nothing to plot");
        xrdn::report::Series train_s, val_s;
        train_s.label = "train loss";
        val_s.label = "validation loss";
        for (const auto& r : rows) {
            train_s.x.push_back(r.epoch);
            train_s.y.push_back(r.train_loss);
            val_s.x.push_back(r.epoch);
            val_s.y.push_back(r.val_loss);
        }
        xrdn::report::PlotSpec spec;
        spec.title = "training history";
        spec.x_label = "epoch";
        spec.y_label = "MAE+MSSIM loss";
        spec.log_y = true;
        xrdn::report::write_svg_lines(
            (fs::path(out) / "loss_curves.svg").string(), spec,
            {train_s, val_s});
        plotted = true;
    }

    const fs::path metrics_path = fs::path(run_dir) / "metrics.csv";
    if (fs::exists(metrics_path)) {
        const auto rows = xrdn::analysis::read_scores_csv(metrics_path.string());
        if (rows.size() >= 10) {
            const xrdn::analysis::ScoreSummary s =
                xrdn::analysis::aggregate_scores(rows);
            if (!s.psnr_bin_center.empty()) {
                const double width =
                    s.psnr_bin_center.size() > 1
                        ? s.psnr_bin_center[1] - s.psnr_bin_center[0]
                        : 1.0;
                xrdn::report::Series overlay;
                overlay.label = "gaussian fit";
                xrdn::CsvTable fit_csv;
                fit_csv.header = {"psnr", "density"};
                if (s.psnr_from_fit) {
                    const double lo = s.psnr_bin_center.front() - width;
                    const double hi = s.psnr_bin_center.back() + width;
                    for (int i = 0; i <= 200; ++i) {
                        const double x = lo + (hi - lo) * i / 200.0;
                        const double z = (x - s.psnr_mu) / s.psnr_sigma;
                        const double y = std::exp(-0.5 * z * z) /
                                         (s.psnr_sigma *
                                          std::sqrt(2.0 * 3.14159265358979323846));
                        overlay.x.push_back(x);
                        overlay.y.push_back(y);
                        fit_csv.rows.push_back({xrdn::format_double(x),
                                                xrdn::format_double(y)});
                    }
                    xrdn::write_csv(
                        (fs::path(out) / "psnr_hist_fit.csv").string(), fit_csv);
                }
                xrdn::report::PlotSpec spec;
                spec.title = "PSNR distribution";
                spec.x_label = "PSNR (dB)";
                spec.y_label = "density";
                std::vector<xrdn::report::Series> overlays;
                if (!overlay.x.empty()) overlays.push_back(overlay);
                xrdn::report::write_svg_histogram(
                    (fs::path(out) / "psnr_hist.svg").string(), spec,
                    s.psnr_bin_center, s.psnr_bin_density, width, overlays);
                plotted = true;
            }
        }
    }

    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("scan_", 0) != 0 || entry.path().extension() != ".csv")
            continue;
        const xrdn::CsvTable t = xrdn::read_csv(entry.path().string());
        xrdn::report::Series s;
        s.label = name.substr(0, name.size() - 4);
        s.points = true;
        for (const auto& row : t.rows) {
            s.x.push_back(std::stod(row[0]));
            s.y.push_back(std::stod(row[1]));
            s.yerr.push_back(std::stod(row[2]));
        }
        xrdn::report::PlotSpec spec;
        spec.title = s.label;
        spec.x_label = "q (r.l.u.)";
        spec.y_label = "intensity";
        xrdn::report::write_svg_lines(
            (fs::path(out) / (s.label + ".svg")).string(), spec, {s});
        plotted = true;
    }

    if (!plotted) throw xrdn::FrameError("report: nothing to plot");
    std::cout << "plots written to " << out << "\n";
    return kExitOk;
}

int classify(const std::exception& e) {
    if (dynamic_cast<const xrdn::cli::ConfigError*>(&e)) return kExitConfig;
    const std::string what = e.what();
    if (what.find("non-finite") != std::string::npos ||
        what.find("diverge") != std::string::npos)
        return kExitNumerical;
    return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale diffraction denoising workbench"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "run";
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    bool stack_mode = false;
    synth->add_flag("--stack", stack_mode,
                    "write the full frame stack instead of training pairs");

    auto* noise = app.add_subcommand("noise", "re-noise clean frames");
    std::string noise_hc, noise_manifest;
    noise->add_option("--hc", noise_hc, "single clean DFRM frame");
    noise->add_option("--manifest", noise_manifest, "manifest whose hc frames to renoise");

    auto* train = app.add_subcommand("train", "train a denoising network");
    std::string train_manifest;
    train->add_option("--manifest", train_manifest, "dataset manifest")
        ->required();

    auto* denoise = app.add_subcommand("denoise", "run a checkpoint on frames");
    std::string dn_checkpoint, dn_manifest, dn_split = "test";
    std::vector<std::string> dn_inputs;
    denoise->add_option("--checkpoint", dn_checkpoint, "DNET checkpoint")
        ->required();
    denoise->add_option("--in", dn_inputs, "input DFRM frames");
    denoise->add_option("--manifest", dn_manifest, "dataset manifest");
    denoise->add_option("--split", dn_split, "manifest split to denoise");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ev_checkpoint, ev_manifest, ev_split = "test";
    eval->add_option("--checkpoint", ev_checkpoint, "DNET checkpoint")
        ->required();
    eval->add_option("--manifest", ev_manifest, "dataset manifest")->required();
    eval->add_option("--split", ev_split, "manifest split to evaluate");

    auto* fit = app.add_subcommand("fit", "peak and pdf fits");
    std::vector<std::string> fit_hc, fit_do;
    std::string fit_pdf_frame, fit_pdf_model = "all";
    fit->add_option("--hc", fit_hc, "high-count stack frames in k order");
    fit->add_option("--do", fit_do, "denoised stack frames in k order");
    fit->add_option("--pdf-frame", fit_pdf_frame, "frame for pdf fitting");
    fit->add_option("--pdf-model", fit_pdf_model,
                    "poisson, gaussian, skew_gaussian, poisson_conv_gaussian or all");

    auto* report = app.add_subcommand("report", "render plots for a run");
    std::string report_run;
    report->add_option("--run", report_run, "run directory with CSV outputs")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;  // --help exits clean
    }

    try {
        xrdn::cli::RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        if (seed_set) cfg.set("seed", std::to_string(seed));
        cfg.resolve();

        if (synth->parsed()) return cmd_synth(cfg, out_dir, stack_mode);
        if (noise->parsed()) {
            if (noise_hc.empty() == noise_manifest.empty())
                throw xrdn::cli::ConfigError(
                    "noise: give exactly one of --hc or --manifest");
            return cmd_noise(cfg, out_dir, noise_hc, noise_manifest);
        }
        if (train->parsed()) return cmd_train(cfg, out_dir, train_manifest);
        if (denoise->parsed()) {
            if (dn_inputs.empty() && dn_manifest.empty())
                throw xrdn::cli::ConfigError(
                    "denoise: give --in frames or --manifest");
            return cmd_denoise(cfg, out_dir, dn_checkpoint, dn_inputs,
                               dn_manifest, dn_split);
        }
        if (eval->parsed())
            return cmd_eval(cfg, out_dir, ev_checkpoint, ev_manifest, ev_split);
        if (fit->parsed())
            return cmd_fit(cfg, out_dir, fit_hc, fit_do, fit_pdf_frame,
                           fit_pdf_model);
        if (report->parsed()) return cmd_report(out_dir, report_run);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return kExitOk;
}
