#pragma once

#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn::analysis {

enum class ScanAxis { h, k, l };

struct QPoint {
    double h = 0.0;
    double k = 0.0;
    double l = 0.0;
};

// Half-widths of the transverse integration window, in r.l.u. per axis. The
// entry matching the scan axis is ignored.
struct ScanWindow {
    double h = 0.0;
    double k = 0.0;
    double l = 0.0;
};

struct ScanProjection {
    ScanAxis axis = ScanAxis::h;
    std::vector<double> coordinate;   // r.l.u. along the scan axis
    std::vector<double> intensity;    // mean over the transverse window
    std::vector<double> error;        // counting-statistics error of the mean
    bool background_subtracted = false;
    double background_offset = 0.0;   // subtracted a + b*q, recorded here
    double background_slope = 0.0;
};

struct PeakFit {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    double amplitude_err = 0.0;
    double center_err = 0.0;
    double sigma_err = 0.0;
    double offset_err = 0.0;
    bool converged = false;
};

struct RatioEntry {
    double value = 0.0;
    double error = 0.0;
    bool present = false;
};

struct AxisRatios {
    double xi_hc = 0.0;
    double xi_do = 0.0;
    double w_hc = 0.0;
    double w_do = 0.0;
    RatioEntry xi_ratio;
    RatioEntry w_ratio;
};

struct CorrelationReport {
    AxisRatios a;   // in-plane, from the h scan
    AxisRatios c;   // out-of-plane, from the l scan
};

// Mean intensity along `axis` through q0, averaging over the transverse
// window; dead pixels are excluded. Frames must carry reciprocal axes; a k
// scan additionally needs the stack axis.
ScanProjection project_scan(const std::vector<Frame>& stack, const QPoint& q0,
                            ScanAxis axis, const ScanWindow& window);

// Fits a line to the outer `flank_fraction` of points on each side and
// subtracts it everywhere. Errors are left untouched.
ScanProjection subtract_background(const ScanProjection& scan,
                                   double flank_fraction = 0.25);

// Least-squares A*exp(-(q-q0)^2/(2 sigma^2)) + B via Nelder-Mead simplex.
// Uncertainties come from the numerical curvature of the objective at the
// optimum. Non-convergence is flagged, best-so-far parameters kept.
PeakFit fit_gaussian_1d(const ScanProjection& scan);

// Inverse-HWHM convention: xi = lattice / (2 pi sqrt(2 ln 2) sigma_q).
double correlation_length(const PeakFit& fit, double lattice_constant);

// Amplitude times full width at half maximum.
double integrated_intensity(const PeakFit& fit);

// DO/HC ratios per axis with uncertainties in quadrature; a ratio is absent
// when either member failed to converge.
CorrelationReport ratio_report(const PeakFit& hc_a, const PeakFit& do_a,
                               const PeakFit& hc_c, const PeakFit& do_c);

void write_scan_csv(const std::string& path, const ScanProjection& scan);

enum class PdfModel { poisson, gaussian, skew_gaussian, poisson_conv_gaussian };

struct PdfFit {
    PdfModel model = PdfModel::poisson;
    std::vector<double> params;        // layout depends on the model
    double reduced_chi2 = 0.0;
    bool converged = false;
    std::vector<double> bin_center;    // Freedman-Diaconis histogram
    std::vector<double> bin_density;
    std::vector<double> bin_density_err;
    double bin_width = 0.0;
};

// Parameter layouts: poisson (lambda, scale); gaussian (mu, sigma);
// skew_gaussian (mu, omega, alpha); poisson_conv_gaussian
// (lambda, scale, sigma_g).
double pdf_model_density(PdfModel model, const std::vector<double>& params,
                         double v);

// Histogram the frame's live pixels and fit the chosen density by chi-square
// simplex search with sqrt(count) bin errors.
PdfFit fit_pdf(const Frame& frame, PdfModel model);

const char* pdf_model_name(PdfModel model);

struct ScoreRow {
    std::string pair_id;
    double psnr = 0.0;
    double mssim = 0.0;
    double quality = 0.0;
};

struct ScoreSummary {
    double psnr_mu = 0.0;       // Gaussian fitted to the PSNR histogram
    double psnr_sigma = 0.0;
    bool psnr_from_fit = false; // false => degenerate histogram, median used
    double mssim_median = 0.0;
    double quality_median = 0.0;
    int count = 0;
    std::vector<double> psnr_bin_center;
    std::vector<double> psnr_bin_density;
};

ScoreSummary aggregate_scores(const std::vector<ScoreRow>& rows);

void write_scores_csv(const std::string& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores_csv(const std::string& path);

}  // namespace xrdn::analysis
