#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qdsim/levelmodel.hpp"
#include "qdsim/polarization.hpp"

namespace qd {

struct Series {
    std::vector<double> taus;    // ns
    std::vector<double> values;  // dimensionless
};

// Heralded polarization-resolved correlation bundle. g2_par detects the same
// handedness as the herald, g2_cross the opposite. dcp is
// (par - cross)/(par + cross), masked where the denominator underflows.
struct CorrelationCurve {
    std::vector<double> taus;
    std::vector<double> g2_par;
    std::vector<double> g2_cross;
    std::vector<double> dcp;
    std::vector<bool> dcp_mask;  // true where dcp is defined
    double rate_par = 0.0;       // steady-state detection rate, ns^-1
    double rate_cross = 0.0;
    Pol herald = Pol::R;
};

struct MaskedSeries {
    std::vector<double> taus;
    std::vector<double> values;  // NaN where masked out
    std::vector<bool> mask;      // true where defined
};

struct SpectrumResult {
    std::vector<double> freqs;      // MHz
    std::vector<double> amplitude;  // magnitude spectrum, arb. units
    double peak_freq = 0.0;         // MHz
    double fwhm = 0.0;              // MHz, measured on the power spectrum
    bool has_peak = false;          // false for signals with no line above DC
};

// State immediately after detecting a `first`-polarized photon from the
// stationary ensemble: J rho_ss J^+ normalized. Throws ZeroDetectionRate
// when the heralding rate Tr[J^+ J rho_ss] < 1e-15.
Eigen::MatrixXcd conditional_state(const LevelModel& m, Pol first);

// Steady-state detection rate Tr[J_pol^+ J_pol rho_ss], ns^-1.
double detection_rate(const LevelModel& m, Pol pol);

// Two-time correlation for an explicit heralding operator:
// g2(tau) = Tr[J2^+ J2 exp(L tau) rho_c] / Tr[J2^+ J2 rho_ss] with
// rho_c = J1 rho_ss J1^+ / Tr. Normalization makes the result invariant
// under rescaling of J1.
Series g2_with_herald_op(const LevelModel& m, const Eigen::MatrixXcd& J1, Pol second,
                         const std::vector<double>& taus);

// Ordered photon pair (first, second) via the regression theorem.
Series g2_pair(const LevelModel& m, Pol first, Pol second, const std::vector<double>& taus);

// Both detection orderings for one herald, plus DCP and detection rates.
// The density-matrix trajectory is propagated once and reused.
CorrelationCurve g2_polarized(const LevelModel& m, Pol first, const std::vector<double>& taus);

// Spin readout underlying the photon DCP: after heralding on `first`, the
// normalized DE population imbalance (P+2 - P-2)/(P+2 + P-2) versus delay.
MaskedSeries heralded_spin_dcp(const LevelModel& m, Pol first, const std::vector<double>& taus);

// Pointwise (par - cross)/(par + cross); masked where |par + cross| <= 1e-12.
// Throws GridMismatch unless the grids agree.
MaskedSeries dcp_from_g2(const Series& par, const Series& cross);

// Gaussian detector-response convolution, sigma = fwhm / (2 sqrt(2 ln 2)),
// mirror padding at the grid ends. fwhm = 0 is the identity. Requires a
// uniform grid.
Series convolve_irf(const Series& c, double irf_fwhm_ns);
CorrelationCurve convolve_irf(const CorrelationCurve& c, double irf_fwhm_ns);

enum class Window { none, hann };

// Magnitude spectrum of (values - tail asymptote), zero-padded 8x, with
// parabolic peak interpolation. Requires a uniform grid of >= 64 points.
SpectrumResult fft_spectrum(const Series& c, Window window = Window::hann);

// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a);

}  // namespace qd
