#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qdsim/bloch.hpp"
#include "qdsim/correlator.hpp"
#include "qdsim/fitkit.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/spinmodel.hpp"

using namespace qd;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

// Weak-drive sweep configuration: Rabi rate one twentieth of the XX decay.
PhysicalParams weak_drive(double B, double omega_scale = 1.0 / 20.0, double G = 0.005) {
    PhysicalParams p;
    p.Omega_R = p.Omega_L = p.gamma_xx * omega_scale;
    p.G_b = G;
    p.B = B;
    return p;
}

PhysicalParams pumped_config() {
    PhysicalParams p;
    p.Omega_R = p.Omega_L = 0.3;
    p.G_b = 0.05;
    p.c_charge = 0.2;
    return p;
}

double slowest_decay(const LevelModel& m) {
    const Propagator P(build_liouvillian(m));
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < P.eigenvalues().size(); ++i) {
        const double re = P.eigenvalues()(i).real();
        if (re < -1e-12) gap = std::min(gap, -re);
    }
    return gap;
}

// Best damped-precession description of a DCP curve with the precession
// parameters pinned to the spin model; returns the max pointwise deviation.
double analytic_law_deviation(const std::vector<double>& taus, const std::vector<double>& dcp,
                              const PhysicalParams& p) {
    FitProblem prob;
    prob.model = FitModel::dcp_damped;
    prob.free = {"A_V", "T_D"};
    prob.fixed = {{"theta_B", mixing_angle(Qubit::DE, p)},
                  {"delta2", qubit_splitting(Qubit::DE, p)}};
    prob.taus = taus;
    prob.values = dcp;
    const FitResult res = fit(prob, {{"A_V", 1.0}, {"T_D", 50.0}});
    REQUIRE(res.converged);
    const auto model = eval_model(prob, res.estimates);
    double dev = 0.0;
    for (size_t i = 0; i < taus.size(); ++i) dev = std::max(dev, std::abs(model[i] - dcp[i]));
    return dev;
}

}  // namespace

TEST_CASE("heralding projects the emitter onto the addressed dark state") {
    const LevelModel m = build_level_model(weak_drive(0.016), Variant::resonant);
    const Eigen::MatrixXcd rho_c = conditional_state(m, Pol::R);
    const int ip = m.index_of(Level::DEp2);
    CHECK(rho_c.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_c(ip, ip).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((rho_c - rho_c.adjoint()).norm() < 1e-12);
}

TEST_CASE("same-polarization pairs are antibunched at zero delay") {
    const LevelModel m = build_level_model(pumped_config(), Variant::resonant);
    const CorrelationCurve c = g2_polarized(m, Pol::R, {0.0});
    CHECK(std::abs(c.g2_par[0]) < 1e-9);
    CHECK(std::abs(c.g2_cross[0]) < 1e-9);  // both XX spin states are emptied by the cascade
}

TEST_CASE("correlations decorrelate to one at long delay") {
    const LevelModel m = build_level_model(weak_drive(0.008), Variant::resonant);
    const double tau = 25.0 / slowest_decay(m);
    const CorrelationCurve c = g2_polarized(m, Pol::R, {tau});
    CHECK(std::abs(c.g2_par[0] - 1.0) < 1e-4);
    CHECK(std::abs(c.g2_cross[0] - 1.0) < 1e-4);
}

TEST_CASE("correlation values stay non-negative") {
    const LevelModel m = build_level_model(pumped_config(), Variant::resonant);
    const CorrelationCurve c = g2_polarized(m, Pol::R, linspace(0.0, 12.0, 241));
    for (double v : c.g2_par) CHECK(v > -1e-9);
    for (double v : c.g2_cross) CHECK(v > -1e-9);
}

TEST_CASE("at zero field the two polarizations are exchange-symmetric") {
    const LevelModel m = build_level_model(weak_drive(0.0), Variant::resonant);
    const auto taus = linspace(0.0, 10.0, 201);
    const Series rr = g2_pair(m, Pol::R, Pol::R, taus);
    const Series ll = g2_pair(m, Pol::L, Pol::L, taus);
    const Series rl = g2_pair(m, Pol::R, Pol::L, taus);
    const Series lr = g2_pair(m, Pol::L, Pol::R, taus);
    for (size_t i = 0; i < taus.size(); ++i) {
        CHECK(std::abs(rr.values[i] - ll.values[i]) < 1e-9);
        CHECK(std::abs(rl.values[i] - lr.values[i]) < 1e-9);
    }
}

TEST_CASE("the polarized bundle matches the individual orderings") {
    const LevelModel m = build_level_model(weak_drive(0.032), Variant::resonant);
    const auto taus = linspace(0.0, 5.0, 101);
    const CorrelationCurve c = g2_polarized(m, Pol::R, taus);
    const Series par = g2_pair(m, Pol::R, Pol::R, taus);
    const Series cross = g2_pair(m, Pol::R, Pol::L, taus);
    for (size_t i = 0; i < taus.size(); ++i) {
        CHECK(c.g2_par[i] == doctest::Approx(par.values[i]).epsilon(1e-12));
        CHECK(c.g2_cross[i] == doctest::Approx(cross.values[i]).epsilon(1e-12));
    }
    CHECK(c.rate_par == doctest::Approx(detection_rate(m, Pol::R)).epsilon(1e-12));
    CHECK(c.rate_cross == doctest::Approx(detection_rate(m, Pol::L)).epsilon(1e-12));
}

TEST_CASE("the normalized correlation is invariant under herald rescaling") {
    const LevelModel m = build_level_model(weak_drive(0.008), Variant::resonant);
    const auto taus = linspace(0.0, 6.0, 61);
    const CollapseChannel* ch = m.channel("emit_R");
    REQUIRE(ch != nullptr);
    const Eigen::MatrixXcd J = std::sqrt(ch->rate) * ch->op;
    const Series a = g2_with_herald_op(m, J, Pol::L, taus);
    const Series b = g2_with_herald_op(m, 7.0 * J, Pol::L, taus);
    for (size_t i = 0; i < taus.size(); ++i)
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
}

TEST_CASE("detection rates match the stationary emission flux") {
    const LevelModel m = build_level_model(pumped_config(), Variant::resonant);
    CHECK(detection_rate(m, Pol::R) == doctest::Approx(0.03425705335285015).epsilon(1e-7));
    CHECK(detection_rate(m, Pol::R) == doctest::Approx(detection_rate(m, Pol::L)).epsilon(1e-10));
}

TEST_CASE("a dark source cannot herald") {
    PhysicalParams p;  // no drive, no pump: stationary state is the vacuum
    p.G_b = 0.0;
    const LevelModel m = build_level_model(p, Variant::resonant);
    CHECK_THROWS_AS(conditional_state(m, Pol::R), ZeroDetectionRate);
    CHECK_THROWS_AS(g2_pair(m, Pol::R, Pol::R, {0.0, 1.0}), ZeroDetectionRate);
    CHECK(detection_rate(m, Pol::R) < 1e-15);
}

TEST_CASE("correlation grids must be sorted and non-negative") {
    const LevelModel m = build_level_model(weak_drive(0.0), Variant::resonant);
    CHECK_THROWS_AS(g2_pair(m, Pol::R, Pol::R, {1.0, 0.5}), GridMismatch);
    CHECK_THROWS_AS(g2_pair(m, Pol::R, Pol::R, {-0.5}), GridMismatch);
    CHECK_THROWS_AS(heralded_spin_dcp(m, Pol::R, {2.0, 1.0}), GridMismatch);
}

TEST_CASE("heralded spin readout starts fully polarized and follows the damped law") {
    const PhysicalParams p = weak_drive(0.008);
    const LevelModel m = build_level_model(p, Variant::resonant);
    const auto taus = linspace(0.0, 10.0, 2001);
    const MaskedSeries spin = heralded_spin_dcp(m, Pol::R, taus);
    REQUIRE(spin.values.size() == taus.size());
    for (bool ok : spin.mask) CHECK(ok);
    CHECK(spin.values[0] == doctest::Approx(1.0).epsilon(1e-10));

    const double dev = analytic_law_deviation(taus, spin.values, p);
    CHECK(dev < 0.05);
    CHECK(dev > 0.015);  // the residual lag of the weak drive, pinned
}

TEST_CASE("the spin readout converges onto the damped law as the drive weakens") {
    const auto taus = linspace(0.0, 10.0, 2001);
    double dev20 = 0.0, dev40 = 0.0;
    {
        const PhysicalParams p = weak_drive(0.0, 1.0 / 20.0, 0.01);
        const MaskedSeries s = heralded_spin_dcp(build_level_model(p, Variant::resonant),
                                                 Pol::R, taus);
        dev20 = analytic_law_deviation(taus, s.values, p);
    }
    {
        const PhysicalParams p = weak_drive(0.0, 1.0 / 40.0, 0.01);
        const MaskedSeries s = heralded_spin_dcp(build_level_model(p, Variant::resonant),
                                                 Pol::R, taus);
        dev40 = analytic_law_deviation(taus, s.values, p);
    }
    CHECK(dev20 < 0.05);
    CHECK(dev40 < 0.012);
    CHECK(dev40 < 0.6 * dev20);
}

TEST_CASE("the photon-pair DCP lags the bare precession period") {
    // The cascade keeps precessing in the XX manifold between herald and
    // second emission, so the first photon-DCP revival sits well past one
    // dark-exciton period (2.39 ns at zero field).
    const PhysicalParams p = weak_drive(0.0);
    const LevelModel m = build_level_model(p, Variant::resonant);
    const auto taus = linspace(0.0, 10.0, 2001);
    const CorrelationCurve c = g2_polarized(m, Pol::R, taus);

    double peak_tau = 0.0, peak_val = -2.0;
    for (size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] <= 1.0 || !c.dcp_mask[i]) continue;
        if (c.dcp[i] > peak_val) {
            peak_val = c.dcp[i];
            peak_tau = taus[i];
        }
    }
    CHECK(std::abs(peak_tau - 2.98) < 0.06);
    CHECK(peak_val > 0.99);
    const double bare_period = 2.0 * std::numbers::pi * hbar / qubit_splitting(Qubit::DE, p);
    CHECK(std::abs(peak_tau - bare_period) > 0.4);
}

TEST_CASE("pointwise DCP handles the edge cases") {
    const std::vector<double> taus = {0.0, 1.0, 2.0};
    const Series par{taus, {2.0, 1.0, 0.5}};
    SUBCASE("equal curves give zero polarization") {
        const MaskedSeries d = dcp_from_g2(par, par);
        for (size_t i = 0; i < taus.size(); ++i) {
            CHECK(d.mask[i]);
            CHECK(d.values[i] == doctest::Approx(0.0));
        }
    }
    SUBCASE("an absent cross channel gives full polarization") {
        const Series cross{taus, {0.0, 0.0, 0.0}};
        const MaskedSeries d = dcp_from_g2(par, cross);
        for (size_t i = 0; i < taus.size(); ++i)
            CHECK(d.values[i] == doctest::Approx(1.0));
    }
    SUBCASE("vanishing denominators are masked out") {
        const Series a{taus, {1.0, 1e-13, 0.5}};
        const Series b{taus, {1.0, -1e-13, 0.5}};
        const MaskedSeries d = dcp_from_g2(a, b);
        CHECK(d.mask[0]);
        CHECK_FALSE(d.mask[1]);
        CHECK(std::isnan(d.values[1]));
        CHECK(d.mask[2]);
    }
    SUBCASE("grid disagreement is an error") {
        const Series other{{0.0, 1.0, 2.5}, {1.0, 1.0, 1.0}};
        CHECK_THROWS_AS(dcp_from_g2(par, other), GridMismatch);
        const Series shorter{{0.0, 1.0}, {1.0, 1.0}};
        CHECK_THROWS_AS(dcp_from_g2(par, shorter), GridMismatch);
    }
}

TEST_CASE("detector smearing leaves a curve intact when disabled") {
    const auto taus = linspace(0.0, 10.0, 501);
    Series s{taus, {}};
    for (double t : taus) s.values.push_back(std::sin(t));
    const Series out = convolve_irf(s, 0.0);
    for (size_t i = 0; i < taus.size(); ++i) CHECK(out.values[i] == s.values[i]);
    CHECK_THROWS_AS(convolve_irf(s, -0.1), DomainError);
}

TEST_CASE("detector smearing preserves constants and integrals") {
    const auto taus = linspace(0.0, 20.0, 1001);
    Series flat{taus, std::vector<double>(taus.size(), 0.75)};
    const Series fc = convolve_irf(flat, 0.45);
    for (double v : fc.values) CHECK(v == doctest::Approx(0.75).epsilon(1e-12));

    Series spike{taus, std::vector<double>(taus.size(), 0.0)};
    spike.values[500] = 1.0;
    const Series sc = convolve_irf(spike, 0.45);
    double sum = 0.0;
    for (double v : sc.values) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    // The spike spreads to the Gaussian's width.
    CHECK(sc.values[500] < 1.0);
    CHECK(sc.values[510] > 0.0);
}

TEST_CASE("detector smearing attenuates a cosine by the Gaussian transfer factor") {
    const double f = 1.0 / 2.39;  // cycles per ns
    const double fwhm = 0.45;
    const auto taus = linspace(0.0, 60.0, 3001);
    Series s{taus, {}};
    for (double t : taus) s.values.push_back(std::cos(2.0 * std::numbers::pi * f * t));
    const Series out = convolve_irf(s, fwhm);

    double amp = 0.0;
    for (size_t i = 0; i < taus.size(); ++i)
        if (taus[i] > 10.0 && taus[i] < 50.0) amp = std::max(amp, std::abs(out.values[i]));
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double expect = std::exp(-0.5 * std::pow(2.0 * std::numbers::pi * f * sigma, 2));
    CHECK(amp == doctest::Approx(expect).epsilon(0.006));
}

TEST_CASE("smearing a correlation bundle recomputes its DCP") {
    const LevelModel m = build_level_model(weak_drive(0.0), Variant::resonant);
    const CorrelationCurve raw = g2_polarized(m, Pol::R, linspace(0.0, 10.0, 501));
    const CorrelationCurve sm = convolve_irf(raw, 0.45);
    for (size_t i = 0; i < sm.taus.size(); ++i) {
        if (!sm.dcp_mask[i]) continue;
        const double expect =
            (sm.g2_par[i] - sm.g2_cross[i]) / (sm.g2_par[i] + sm.g2_cross[i]);
        CHECK(sm.dcp[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    // Finite response rounds off the zero-delay antibunching dip.
    CHECK(sm.g2_par[0] > raw.g2_par[0] + 1e-3);
}

TEST_CASE("the spectrum locates a damped precession line") {
    const double f_ghz = 0.417;
    const auto taus = linspace(0.0, 60.0, 3000);
    Series s{taus, {}};
    for (double t : taus)
        s.values.push_back(std::cos(2.0 * std::numbers::pi * f_ghz * t) * std::exp(-t / 8.0));

    const SpectrumResult none = fft_spectrum(s, Window::none);
    REQUIRE(none.has_peak);
    CHECK(std::abs(none.peak_freq - 417.49) < 0.5);
    // Lorentzian-like power linewidth of an exponentially damped cosine:
    // 1/(pi T_D) = 39.79 MHz for T_D = 8 ns.
    CHECK(std::abs(none.fwhm - 39.79) < 3.0);

    const SpectrumResult hann = fft_spectrum(s, Window::hann);
    REQUIRE(hann.has_peak);
    CHECK(std::abs(hann.peak_freq - 417.0) < 1.5);
}

TEST_CASE("the spectrum reports no line for flat input") {
    const auto taus = linspace(0.0, 30.0, 256);
    const SpectrumResult r = fft_spectrum(Series{taus, std::vector<double>(256, 1.0)});
    CHECK_FALSE(r.has_peak);
    CHECK(r.peak_freq == 0.0);
}

TEST_CASE("the spectrum validates its grid") {
    CHECK_THROWS_AS(fft_spectrum(Series{linspace(0.0, 1.0, 32), std::vector<double>(32, 0.0)}),
                    GridMismatch);
    auto taus = linspace(0.0, 10.0, 128);
    taus[64] += 0.003;
    CHECK_THROWS_AS(fft_spectrum(Series{taus, std::vector<double>(128, 0.0)}), NonUniformGrid);
}

TEST_CASE("the radix-2 transform satisfies Parseval and inverts cleanly") {
    std::vector<std::complex<double>> x(128);
    for (size_t i = 0; i < x.size(); ++i)
        x[i] = {std::cos(0.37 * static_cast<double>(i)), std::sin(0.11 * static_cast<double>(i))};
    const std::vector<std::complex<double>> orig = x;

    fft_pow2(x);
    double px = 0.0, pX = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        px += std::norm(orig[i]);
        pX += std::norm(x[i]);
    }
    CHECK(pX == doctest::Approx(static_cast<double>(x.size()) * px).epsilon(1e-12));

    // Inverse through conjugation.
    for (auto& v : x) v = std::conj(v);
    fft_pow2(x);
    for (size_t i = 0; i < x.size(); ++i) {
        const std::complex<double> back = std::conj(x[i]) / static_cast<double>(x.size());
        CHECK(std::abs(back - orig[i]) < 1e-12);
    }

    std::vector<std::complex<double>> bad(100);
    CHECK_THROWS_AS(fft_pow2(bad), DomainError);
}
