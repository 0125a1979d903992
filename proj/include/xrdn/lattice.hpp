#pragma once

#include <cmath>

namespace xrdn {

constexpr double kPi = 3.14159265358979323846;

// Tetragonal lattice constants used for the r.l.u. -> inverse-angstrom
// conversion (a = b applies to h and k, c to l). Angstrom.
constexpr double kLatticeA = 3.7618;
constexpr double kLatticeC = 13.20;

// FWHM = kFwhmFactor * sigma for a Gaussian.
inline const double kFwhmFactor = 2.0 * std::sqrt(2.0 * std::log(2.0));

// Gaussian sigma (r.l.u.) that yields correlation length xi (angstrom) under
// the inverse-HWHM convention: xi = lattice / (2*pi*sqrt(2 ln 2)*sigma).
inline double sigma_rlu_for_xi(double lattice, double xi) {
    return lattice / (kPi * kFwhmFactor * xi);
}

}  // namespace xrdn
