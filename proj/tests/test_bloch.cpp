#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdsim/bloch.hpp"
#include "qdsim/constants.hpp"
#include "qdsim/errors.hpp"

using namespace qd;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Distance between two angles modulo 2 pi.
double ang_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), two_pi);
    return std::min(d, two_pi - d);
}

}  // namespace

TEST_CASE("free precession leaves the polar angle alone and winds the azimuth") {
    const BlochState s{1.0, 0.3};
    const double delta = 2.0;
    const double t = 0.5;
    const BlochState r = bloch_evolve(s, delta, t);
    CHECK(r.theta == s.theta);
    CHECK(ang_dist(r.phi, 0.3 - delta / hbar * t) < 1e-12);
    CHECK(r.phi >= 0.0);
    CHECK(r.phi < two_pi);
}

TEST_CASE("the stored azimuth is always wrapped to [0, 2 pi)") {
    const BlochState r = bloch_evolve({0.5, 0.1}, 5.0, 100.0);
    CHECK(r.phi >= 0.0);
    CHECK(r.phi < two_pi);
    const BlochState b = bloch_evolve({0.5, 0.1}, -5.0, 100.0);
    CHECK(b.phi >= 0.0);
    CHECK(b.phi < two_pi);
}

TEST_CASE("precession composes: two short steps equal one long step") {
    const BlochState s{0.8, 4.0};
    const double delta = 1.7304050072842216;
    for (double t1 : {0.1, 2.39, 17.0}) {
        const double t2 = 0.77 * t1 + 0.05;
        const BlochState two = bloch_evolve(bloch_evolve(s, delta, t1), delta, t2);
        const BlochState one = bloch_evolve(s, delta, t1 + t2);
        CHECK(two.theta == one.theta);
        CHECK(ang_dist(two.phi, one.phi) < 1e-12);
    }
}

TEST_CASE("a full period returns the state to its start") {
    const double delta = 1.7304050072842216;
    const double period = two_pi * hbar / delta;
    const BlochState s{1.2, 0.9};
    const BlochState r = bloch_evolve(s, delta, period);
    CHECK(ang_dist(r.phi, s.phi) < 1e-12);
}

TEST_CASE("heralded initial states sit at the field-tilted equator") {
    const double th = 0.3;
    const BlochState r = heralded_initial_state(Pol::R, th);
    CHECK(r.theta == doctest::Approx(std::numbers::pi / 2.0 - th).epsilon(1e-15));
    CHECK(r.phi == 0.0);
    const BlochState l = heralded_initial_state(Pol::L, th);
    CHECK(l.theta == doctest::Approx(std::numbers::pi / 2.0 + th).epsilon(1e-15));
    CHECK(l.phi == doctest::Approx(std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("the two heralded states are antipodal") {
    for (double th : {0.0, 0.2, 1.1}) {
        const BlochState r = heralded_initial_state(Pol::R, th);
        const BlochState l = heralded_initial_state(Pol::L, th);
        CHECK(r.theta + l.theta == doctest::Approx(std::numbers::pi).epsilon(1e-15));
        CHECK(ang_dist(r.phi + std::numbers::pi, l.phi) < 1e-15);
    }
}

TEST_CASE("undamped DCP starts at one and oscillates with the qubit period") {
    const double d2 = 1.7363492241551937;
    for (double th : {0.0, 0.0827690092987412, 1.1215153453477610}) {
        CHECK(dcp_ideal(0.0, d2, th) == doctest::Approx(1.0).epsilon(1e-15));
        const double period = two_pi * hbar / d2;
        for (double tau : {0.7, 3.1, 9.4}) {
            CHECK(dcp_ideal(tau + period, d2, th) ==
                  doctest::Approx(dcp_ideal(tau, d2, th)).epsilon(1e-10));
        }
        // Half a period reaches the opposite pole of the oscillation.
        CHECK(dcp_ideal(period / 2.0, d2, th) ==
              doctest::Approx(-std::cos(2.0 * th)).epsilon(1e-10));
    }
}

TEST_CASE("at zero mixing the DCP is a pure cosine of the precession phase") {
    const double d2 = 1.7304050072842216;
    for (double tau : {0.0, 0.4, 1.9, 5.3}) {
        CHECK(dcp_ideal(tau, d2, 0.0) == doctest::Approx(std::cos(d2 * tau / hbar)).epsilon(1e-12));
    }
}

TEST_CASE("peak-to-valley swing of the undamped DCP equals cos^2 theta_B") {
    const double d2 = 2.1;
    for (double th : {0.0, 0.3, 0.8, 1.3}) {
        const double tau_valley = std::numbers::pi * hbar / d2;
        const double tau_peak = two_pi * hbar / d2;
        const double swing =
            (dcp_ideal(tau_peak, d2, th) - dcp_ideal(tau_valley, d2, th)) / 2.0;
        CHECK(swing == doctest::Approx(visibility(th, 1.0)).epsilon(1e-10));
        CHECK(visibility(th, 1.0) ==
              doctest::Approx(std::cos(th) * std::cos(th)).epsilon(1e-15));
    }
}

TEST_CASE("damped DCP is the undamped curve scaled by amplitude and decay") {
    const double d2 = 1.73, th = 0.4, A = 0.84, T = 8.0;
    for (double tau : {0.0, 1.0, 6.2, 24.0}) {
        CHECK(dcp_damped(tau, d2, th, A, T) ==
              doctest::Approx(A * dcp_ideal(tau, d2, th) * std::exp(-tau / T)).epsilon(1e-14));
    }
}

TEST_CASE("non-positive damping times are rejected") {
    CHECK_THROWS_AS(dcp_damped(1.0, 1.73, 0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(dcp_damped(1.0, 1.73, 0.0, 1.0, -3.0), DomainError);
}

TEST_CASE("very slow damping approaches the undamped curve") {
    const double d2 = 1.73, th = 0.2;
    for (double tau : {0.5, 4.0, 12.0}) {
        CHECK(dcp_damped(tau, d2, th, 1.0, 1e12) ==
              doctest::Approx(dcp_ideal(tau, d2, th)).epsilon(1e-9));
    }
}

TEST_CASE("visibility scales linearly with the amplitude prefactor") {
    CHECK(visibility(0.3, 0.0) == 0.0);
    CHECK(visibility(0.3, 2.0) == doctest::Approx(2.0 * visibility(0.3, 1.0)).epsilon(1e-15));
    CHECK(visibility(std::numbers::pi / 2.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}
