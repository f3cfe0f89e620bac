#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdsim/rng.hpp"
#include "qdsim/spinmodel.hpp"

using namespace qd;

namespace {

PhysicalParams at_field(double B) {
    PhysicalParams p;
    p.B = B;
    return p;
}

// The 2x2 block the eigensystem routine diagonalizes in closed form.
Eigen::Matrix2cd qubit_block(Qubit q, const PhysicalParams& p) {
    const double beta = qubit_beta(q, p);
    const double hw = hbar * (q == Qubit::DE ? p.omega2 : p.omega3);
    const double c = q == Qubit::XX ? p.delta_xx : 0.0;
    Eigen::Matrix2cd h;
    h << c - beta / 2.0, hw / 2.0, hw / 2.0, c + beta / 2.0;
    return h;
}

}  // namespace

TEST_CASE("static Hamiltonian blocks carry the expected entries") {
    const PhysicalParams p = at_field(0.2);
    const Matrix4 h = build_h4(p);
    const double beta2 = magnetic_energy(p.g_e - p.g_h, p.B);
    const double beta3 = magnetic_energy(p.g_2h, p.B);

    CHECK(h(0, 0).real() == doctest::Approx(-beta2 / 2.0).epsilon(1e-14));
    CHECK(h(1, 1).real() == doctest::Approx(beta2 / 2.0).epsilon(1e-14));
    CHECK(h(0, 1).real() == doctest::Approx(hbar * p.omega2 / 2.0).epsilon(1e-14));
    CHECK(h(2, 2).real() == doctest::Approx(p.delta_xx + beta3).epsilon(1e-14));
    CHECK(h(3, 3).real() == doctest::Approx(p.delta_xx - beta3).epsilon(1e-14));
    CHECK(h(2, 3).real() == doctest::Approx(hbar * p.omega3 / 2.0).epsilon(1e-14));
    CHECK((h - h.adjoint()).norm() == doctest::Approx(0.0));
    // No static coupling between the two manifolds.
    CHECK(std::abs(h(0, 2)) == 0.0);
    CHECK(std::abs(h(1, 3)) == 0.0);
}

TEST_CASE("driven Hamiltonian adds circular Rabi couplings") {
    PhysicalParams p = at_field(0.05);
    p.Omega_R = 0.3;
    p.Omega_L = 0.2;
    p.detuning = 1.5;
    const Matrix4 h = build_h_driven(p);
    const double beta3 = magnetic_energy(p.g_2h, p.B);

    CHECK(h(0, 2).real() == doctest::Approx(hbar * 0.3).epsilon(1e-14));
    CHECK(h(1, 3).real() == doctest::Approx(hbar * 0.2).epsilon(1e-14));
    CHECK(std::abs(h(0, 3)) == 0.0);  // no cross-circular coupling
    CHECK(std::abs(h(1, 2)) == 0.0);
    CHECK(h(2, 2).real() == doctest::Approx(p.detuning + beta3 / 2.0).epsilon(1e-14));
    CHECK(h(3, 3).real() == doctest::Approx(p.detuning - beta3 / 2.0).epsilon(1e-14));
    CHECK((h - h.adjoint()).norm() == doctest::Approx(0.0));
}

TEST_CASE("static and driven forms disagree by a factor two in the XX Zeeman gap") {
    // Kept as two distinct conventions on purpose: the static table uses the
    // full beta3 on the diagonal, the driven rotating frame half of it.
    PhysicalParams p = at_field(0.2);
    p.delta_xx = 0.0;
    p.detuning = 0.0;
    const Matrix4 hs = build_h4(p);
    const Matrix4 hd = build_h_driven(p);
    const double gap_static = (hs(2, 2) - hs(3, 3)).real();
    const double gap_driven = (hd(2, 2) - hd(3, 3)).real();
    CHECK(gap_static == doctest::Approx(2.0 * gap_driven).epsilon(1e-12));
    // DE blocks agree exactly between the two forms.
    CHECK((hs.topLeftCorner<2, 2>() - hd.topLeftCorner<2, 2>()).norm() == doctest::Approx(0.0));
}

TEST_CASE("at zero field the undriven forms coincide when the offsets match") {
    PhysicalParams p = at_field(0.0);
    p.delta_xx = 2.0;
    p.detuning = 2.0;
    CHECK((build_h4(p) - build_h_driven(p)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("dark-exciton splitting and mixing angle at reference fields") {
    const PhysicalParams p0 = at_field(0.0);
    CHECK(qubit_splitting(Qubit::DE, p0) == doctest::Approx(1.7304050072842216).epsilon(1e-14));
    CHECK(mixing_angle(Qubit::DE, p0) == doctest::Approx(0.0));

    const PhysicalParams p8 = at_field(0.008);
    CHECK(qubit_splitting(Qubit::DE, p8) == doctest::Approx(1.7363492241551937).epsilon(1e-14));
    CHECK(mixing_angle(Qubit::DE, p8) == doctest::Approx(0.08276900929874116).epsilon(1e-12));

    const PhysicalParams p200 = at_field(0.2);
    CHECK(qubit_beta(Qubit::DE, p200) == doctest::Approx(3.5887967159999996).epsilon(1e-14));
    CHECK(qubit_splitting(Qubit::DE, p200) == doctest::Approx(3.984189171965444).epsilon(1e-14));
    CHECK(mixing_angle(Qubit::DE, p200) == doctest::Approx(1.121515345347761).epsilon(1e-12));
}

TEST_CASE("mixing angle is odd in B and the splitting is even") {
    for (double B : {0.004, 0.032, 0.2}) {
        CHECK(mixing_angle(Qubit::DE, at_field(-B)) ==
              doctest::Approx(-mixing_angle(Qubit::DE, at_field(B))).epsilon(1e-14));
        CHECK(qubit_splitting(Qubit::XX, at_field(-B)) ==
              doctest::Approx(qubit_splitting(Qubit::XX, at_field(B))).epsilon(1e-14));
    }
}

TEST_CASE("mixing angle grows monotonically with field") {
    double prev = 0.0;
    for (double B : {0.0, 0.004, 0.016, 0.064, 0.2, 1.0}) {
        const double th = mixing_angle(Qubit::DE, at_field(B));
        CHECK(th >= prev);
        CHECK(th < std::numbers::pi / 2.0);
        prev = th;
    }
}

TEST_CASE("mixing angle degenerate corner is defined as zero") {
    PhysicalParams p = at_field(0.0);
    p.omega2 = 0.0;
    CHECK(mixing_angle(Qubit::DE, p) == 0.0);
    CHECK(qubit_splitting(Qubit::DE, p) == 0.0);
}

TEST_CASE("qubit eigensystem diagonalizes its block over random parameters") {
    Rng rng(20240512);
    for (int trial = 0; trial < 100; ++trial) {
        PhysicalParams p;
        p.g_e = 4.0 * rng.uniform() - 2.0;
        p.g_h = 4.0 * rng.uniform() - 2.0;
        p.g_2h = 4.0 * rng.uniform() - 2.0;
        p.omega2 = 0.5 + 4.5 * rng.uniform();
        p.omega3 = 0.5 + 4.5 * rng.uniform();
        p.delta_xx = 10.0 * rng.uniform() - 5.0;
        p.B = rng.uniform() - 0.5;
        const Qubit q = trial % 2 == 0 ? Qubit::DE : Qubit::XX;

        const QubitEigenpair e = qubit_eigensystem(q, p);
        const Eigen::Matrix2cd h = qubit_block(q, p);

        CHECK((h * e.v_minus - e.e_minus * e.v_minus).norm() < 1e-10);
        CHECK((h * e.v_plus - e.e_plus * e.v_plus).norm() < 1e-10);
        CHECK(e.e_minus <= e.e_plus);
        CHECK(e.e_plus - e.e_minus == doctest::Approx(e.delta_B).epsilon(1e-12));
        CHECK(e.delta_B == doctest::Approx(qubit_splitting(q, p)).epsilon(1e-14));
        CHECK(e.theta_B == doctest::Approx(mixing_angle(q, p)).epsilon(1e-14));

        CHECK(e.v_minus.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.v_plus.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(e.v_minus.dot(e.v_plus)) < 1e-12);
        // Phase convention: leading coefficient real and non-negative.
        CHECK(e.v_minus(0).imag() == 0.0);
        CHECK(e.v_minus(0).real() >= -1e-15);
    }
}

TEST_CASE("lower eigenstate rotates toward |+i> as the field grows") {
    // |<+2|v_minus>| = cos(pi/4 - theta_B/2), increasing with theta_B >= 0.
    double prev = 0.0;
    for (double B : {0.0, 0.008, 0.032, 0.1, 0.3}) {
        const QubitEigenpair e = qubit_eigensystem(Qubit::DE, at_field(B));
        const double amp = std::abs(e.v_minus(0));
        CHECK(amp == doctest::Approx(std::cos(std::numbers::pi / 4.0 - e.theta_B / 2.0))
                         .epsilon(1e-12));
        CHECK(amp >= prev - 1e-15);
        prev = amp;
    }
}

TEST_CASE("line splittings at 0.2 T match the measured table") {
    const PhysicalParams p = at_field(0.2);
    CHECK(zeeman_line_splitting(Line::X0, p) ==
          doctest::Approx(30.00219986041805).epsilon(1e-14));
    CHECK(zeeman_line_splitting(Line::Xpm, p) == doctest::Approx(13.081742868).epsilon(1e-14));
    CHECK(zeeman_line_splitting(Line::XXT3, p) == doctest::Approx(-13.6).epsilon(1e-12));
    CHECK(zeeman_line_splitting(Line::XD, p) ==
          doctest::Approx(3.5887967159999996).epsilon(1e-14));
}

TEST_CASE("line splittings at zero field collapse onto the bright doublet gap") {
    const PhysicalParams p = at_field(0.0);
    CHECK(zeeman_line_splitting(Line::X0, p) == doctest::Approx(27.0).epsilon(1e-14));
    CHECK(zeeman_line_splitting(Line::Xpm, p) == 0.0);
    CHECK(zeeman_line_splitting(Line::XXT3, p) == 0.0);
    CHECK(zeeman_line_splitting(Line::XD, p) == 0.0);
}

TEST_CASE("X0 splitting is even in B, the linear lines are odd") {
    const PhysicalParams pp = at_field(0.15);
    const PhysicalParams pm = at_field(-0.15);
    CHECK(zeeman_line_splitting(Line::X0, pm) ==
          doctest::Approx(zeeman_line_splitting(Line::X0, pp)).epsilon(1e-14));
    for (Line line : {Line::Xpm, Line::XXT3, Line::XD})
        CHECK(zeeman_line_splitting(line, pm) ==
              doctest::Approx(-zeeman_line_splitting(line, pp)).epsilon(1e-14));
}

TEST_CASE("line names round-trip and unknown names are rejected") {
    for (Line line : {Line::X0, Line::Xpm, Line::XXT3, Line::XD})
        CHECK(parse_line(line_name(line)) == line);
    CHECK_THROWS_AS(parse_line("X1"), UnknownLine);
    CHECK_THROWS_AS(parse_line(""), UnknownLine);
}
