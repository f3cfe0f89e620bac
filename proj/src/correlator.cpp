#include "qdsim/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "qdsim/errors.hpp"
#include "qdsim/liouville.hpp"

namespace qd {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kRateFloor = 1e-15;

void check_grid(const std::vector<double>& taus) {
    for (size_t i = 0; i < taus.size(); ++i)
        if (taus[i] < 0.0 || (i > 0 && taus[i] < taus[i - 1]))
            throw GridMismatch("tau grid must be sorted and non-negative");
}

MatrixXcd emission_op(const LevelModel& m, Pol pol) {
    const CollapseChannel* ch = m.channel(pol == Pol::R ? "emit_R" : "emit_L");
    if (!ch) throw ZeroDetectionRate("model has no emission channel for this polarization");
    return std::sqrt(ch->rate) * ch->op;
}

double expectation(const MatrixXcd& obs, const MatrixXcd& rho) {
    return (obs * rho).trace().real();
}

// Shared pieces of one regression-theorem evaluation: generator, stationary
// state, and its spectral propagator.
struct RegressionContext {
    Liouvillian L;
    MatrixXcd rho_ss;
    Propagator P;

    explicit RegressionContext(const LevelModel& m)
        : L(build_liouvillian(m)), rho_ss(steady_state(L)), P(L) {}
};

Series g2_one_ordering(const RegressionContext& ctx, const MatrixXcd& J1, const MatrixXcd& J2,
                       const std::vector<double>& taus) {
    const double herald_rate = expectation(J1.adjoint() * J1, ctx.rho_ss);
    if (herald_rate < kRateFloor)
        throw ZeroDetectionRate("heralding rate below 1e-15, nothing to condition on");
    const MatrixXcd obs2 = J2.adjoint() * J2;
    const double denom = expectation(obs2, ctx.rho_ss);
    if (denom < kRateFloor)
        throw ZeroDetectionRate("second-photon steady rate below 1e-15");

    MatrixXcd rho_c = J1 * ctx.rho_ss * J1.adjoint();
    rho_c /= rho_c.trace().real();

    Series out;
    out.taus = taus;
    out.values.reserve(taus.size());
    const auto traj = ctx.P.apply_many(vec(rho_c), taus);
    for (const auto& v : traj)
        out.values.push_back(expectation(obs2, unvec(v, ctx.L.dim)) / denom);
    return out;
}

MaskedSeries masked_ratio(const std::vector<double>& taus, const std::vector<double>& num,
                          const std::vector<double>& den) {
    MaskedSeries out;
    out.taus = taus;
    out.values.resize(taus.size());
    out.mask.resize(taus.size());
    for (size_t i = 0; i < taus.size(); ++i) {
        const bool ok = std::abs(den[i]) > 1e-12;
        out.mask[i] = ok;
        out.values[i] = ok ? num[i] / den[i] : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double uniform_step(const std::vector<double>& taus) {
    const std::size_t n = taus.size();
    const double dt = (taus.back() - taus.front()) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw NonUniformGrid("grid step must be positive");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (std::abs(taus[i + 1] - taus[i] - dt) > 1e-9 * dt)
            throw NonUniformGrid("tau grid is not uniform");
    return dt;
}

// Mirror index about the end samples (no boundary repeat), folded until it
// lands inside [0, n).
std::size_t mirror(long long i, long long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

}  // namespace

Eigen::MatrixXcd conditional_state(const LevelModel& m, Pol first) {
    RegressionContext ctx(m);
    const MatrixXcd J = emission_op(m, first);
    MatrixXcd rho_c = J * ctx.rho_ss * J.adjoint();
    const double tr = rho_c.trace().real();
    if (tr < kRateFloor)
        throw ZeroDetectionRate("heralding rate below 1e-15, nothing to condition on");
    return rho_c / tr;
}

double detection_rate(const LevelModel& m, Pol pol) {
    RegressionContext ctx(m);
    const MatrixXcd J = emission_op(m, pol);
    return expectation(J.adjoint() * J, ctx.rho_ss);
}

Series g2_with_herald_op(const LevelModel& m, const Eigen::MatrixXcd& J1, Pol second,
                         const std::vector<double>& taus) {
    check_grid(taus);
    RegressionContext ctx(m);
    return g2_one_ordering(ctx, J1, emission_op(m, second), taus);
}

Series g2_pair(const LevelModel& m, Pol first, Pol second, const std::vector<double>& taus) {
    return g2_with_herald_op(m, emission_op(m, first), second, taus);
}

CorrelationCurve g2_polarized(const LevelModel& m, Pol first, const std::vector<double>& taus) {
    check_grid(taus);
    RegressionContext ctx(m);
    const MatrixXcd J1 = emission_op(m, first);
    const MatrixXcd Jco = J1;
    const MatrixXcd Jcr = emission_op(m, opposite(first));

    CorrelationCurve c;
    c.taus = taus;
    c.herald = first;
    c.rate_par = expectation(Jco.adjoint() * Jco, ctx.rho_ss);
    c.rate_cross = expectation(Jcr.adjoint() * Jcr, ctx.rho_ss);
    c.g2_par = g2_one_ordering(ctx, J1, Jco, taus).values;
    c.g2_cross = g2_one_ordering(ctx, J1, Jcr, taus).values;

    std::vector<double> num(taus.size()), den(taus.size());
    for (size_t i = 0; i < taus.size(); ++i) {
        num[i] = c.g2_par[i] - c.g2_cross[i];
        den[i] = c.g2_par[i] + c.g2_cross[i];
    }
    MaskedSeries d = masked_ratio(taus, num, den);
    c.dcp = std::move(d.values);
    c.dcp_mask = std::move(d.mask);
    return c;
}

MaskedSeries heralded_spin_dcp(const LevelModel& m, Pol first,
                               const std::vector<double>& taus) {
    check_grid(taus);
    RegressionContext ctx(m);
    const MatrixXcd J1 = emission_op(m, first);
    const double herald_rate = expectation(J1.adjoint() * J1, ctx.rho_ss);
    if (herald_rate < kRateFloor)
        throw ZeroDetectionRate("heralding rate below 1e-15, nothing to condition on");
    MatrixXcd rho_c = J1 * ctx.rho_ss * J1.adjoint();
    rho_c /= rho_c.trace().real();

    const int ip = m.index_of(Level::DEp2);
    const int im = m.index_of(Level::DEm2);
    std::vector<double> num(taus.size()), den(taus.size());
    const auto traj = ctx.P.apply_many(vec(rho_c), taus);
    for (size_t i = 0; i < taus.size(); ++i) {
        const MatrixXcd rho = unvec(traj[i], ctx.L.dim);
        const double p = rho(ip, ip).real();
        const double q = rho(im, im).real();
        num[i] = p - q;
        den[i] = p + q;
    }
    return masked_ratio(taus, num, den);
}

MaskedSeries dcp_from_g2(const Series& par, const Series& cross) {
    if (par.taus.size() != cross.taus.size())
        throw GridMismatch("curves have different lengths");
    for (size_t i = 0; i < par.taus.size(); ++i)
        if (std::abs(par.taus[i] - cross.taus[i]) > 1e-12 * (1.0 + std::abs(par.taus[i])))
            throw GridMismatch("curves are sampled on different tau grids");
    std::vector<double> num(par.taus.size()), den(par.taus.size());
    for (size_t i = 0; i < par.taus.size(); ++i) {
        num[i] = par.values[i] - cross.values[i];
        den[i] = par.values[i] + cross.values[i];
    }
    return masked_ratio(par.taus, num, den);
}

Series convolve_irf(const Series& c, double irf_fwhm_ns) {
    if (irf_fwhm_ns < 0.0) throw DomainError("irf_fwhm must be >= 0");
    if (irf_fwhm_ns == 0.0 || c.taus.size() < 2) return c;
    const double dt = uniform_step(c.taus);
    const double sigma = irf_fwhm_ns / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const long long radius = static_cast<long long>(std::ceil(7.0 * sigma / dt));

    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long long k = -radius; k <= radius; ++k) {
        const double x = static_cast<double>(k) * dt / sigma;
        kernel[static_cast<size_t>(k + radius)] = std::exp(-0.5 * x * x);
        sum += kernel[static_cast<size_t>(k + radius)];
    }
    for (double& w : kernel) w /= sum;

    const long long n = static_cast<long long>(c.values.size());
    Series out;
    out.taus = c.taus;
    out.values.resize(c.values.size());
    for (long long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long long k = -radius; k <= radius; ++k)
            acc += kernel[static_cast<size_t>(k + radius)] * c.values[mirror(i - k, n)];
        out.values[static_cast<size_t>(i)] = acc;
    }
    return out;
}

CorrelationCurve convolve_irf(const CorrelationCurve& c, double irf_fwhm_ns) {
    CorrelationCurve out = c;
    Series par{c.taus, c.g2_par}, cross{c.taus, c.g2_cross};
    out.g2_par = convolve_irf(par, irf_fwhm_ns).values;
    out.g2_cross = convolve_irf(cross, irf_fwhm_ns).values;
    std::vector<double> num(c.taus.size()), den(c.taus.size());
    for (size_t i = 0; i < c.taus.size(); ++i) {
        num[i] = out.g2_par[i] - out.g2_cross[i];
        den[i] = out.g2_par[i] + out.g2_cross[i];
    }
    MaskedSeries d = masked_ratio(c.taus, num, den);
    out.dcp = std::move(d.values);
    out.dcp_mask = std::move(d.mask);
    return out;
}

void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw DomainError("FFT size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

SpectrumResult fft_spectrum(const Series& c, Window window) {
    const std::size_t n = c.taus.size();
    if (n < 64) throw GridMismatch("spectrum needs at least 64 samples");
    const double dt = uniform_step(c.taus);

    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double asym = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) asym += c.values[i];
    asym /= static_cast<double>(tail);

    std::vector<double> x(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = c.values[i] - asym;
        scale = std::max(scale, std::abs(x[i]));
    }
    if (window == Window::hann) {
        for (std::size_t i = 0; i < n; ++i)
            x[i] *= 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                          static_cast<double>(n - 1)));
    }

    const std::size_t npad = 8 * next_pow2(n);
    std::vector<std::complex<double>> buf(npad, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    fft_pow2(buf);

    SpectrumResult r;
    const std::size_t nf = npad / 2 + 1;
    const double df_mhz = 1000.0 / (static_cast<double>(npad) * dt);
    r.freqs.resize(nf);
    r.amplitude.resize(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        r.freqs[k] = static_cast<double>(k) * df_mhz;
        r.amplitude[k] = std::abs(buf[k]);
    }

    if (scale <= 1e-13 * std::max(1.0, std::abs(asym))) return r;  // flat input, no line

    // A line must be a local maximum away from the DC bin; a spectrum that
    // decays monotonically from DC (pure relaxation) has no line to report.
    std::size_t kmax = 0;
    for (std::size_t k = 2; k + 2 < nf; ++k) {
        if (r.amplitude[k] > r.amplitude[k - 1] && r.amplitude[k] >= r.amplitude[k + 1] &&
            (kmax == 0 || r.amplitude[k] > r.amplitude[kmax]))
            kmax = k;
    }
    if (kmax == 0 || r.amplitude[kmax] <= 0.0) return r;
    r.has_peak = true;

    double delta = 0.0;
    if (kmax + 1 < nf && kmax >= 1) {
        const double am = r.amplitude[kmax - 1], a0 = r.amplitude[kmax], ap = r.amplitude[kmax + 1];
        const double d2 = am - 2.0 * a0 + ap;
        if (d2 < 0.0) delta = 0.5 * (am - ap) / d2;
    }
    r.peak_freq = (static_cast<double>(kmax) + delta) * df_mhz;

    // Half-maximum crossings of the power spectrum around the peak.
    const double half = r.amplitude[kmax] * r.amplitude[kmax] / 2.0;
    auto power = [&](std::size_t k) { return r.amplitude[k] * r.amplitude[k]; };
    double f_lo = r.freqs.front(), f_hi = r.freqs.back();
    for (std::size_t k = kmax; k-- > 0;) {
        if (power(k) < half) {
            const double p0 = power(k), p1 = power(k + 1);
            f_lo = r.freqs[k] + (half - p0) / (p1 - p0) * df_mhz;
            break;
        }
    }
    for (std::size_t k = kmax + 1; k < nf; ++k) {
        if (power(k) < half) {
            const double p0 = power(k - 1), p1 = power(k);
            f_hi = r.freqs[k - 1] + (p0 - half) / (p0 - p1) * df_mhz;
            break;
        }
    }
    r.fwhm = std::max(f_hi - f_lo, 0.0);
    return r;
}

}  // namespace qd
