#include "qdsim/spinmodel.hpp"

#include <cmath>

namespace qd {

Matrix4 build_h4(const PhysicalParams& p) {
    const double beta2 = magnetic_energy(p.g_e - p.g_h, p.B);
    const double beta3 = magnetic_energy(p.g_2h, p.B);
    const double hw2 = hbar * p.omega2;
    const double hw3 = hbar * p.omega3;

    Matrix4 h = Matrix4::Zero();
    h(0, 0) = -beta2 / 2.0;
    h(1, 1) = beta2 / 2.0;
    h(0, 1) = h(1, 0) = hw2 / 2.0;
    h(2, 2) = p.delta_xx + beta3;
    h(3, 3) = p.delta_xx - beta3;
    h(2, 3) = h(3, 2) = hw3 / 2.0;
    return h;
}

Matrix4 build_h_driven(const PhysicalParams& p) {
    const double beta2 = magnetic_energy(p.g_e - p.g_h, p.B);
    const double beta3 = magnetic_energy(p.g_2h, p.B);
    const double hw2 = hbar * p.omega2;
    const double hw3 = hbar * p.omega3;

    Matrix4 h = Matrix4::Zero();
    h(0, 0) = -beta2 / 2.0;
    h(1, 1) = beta2 / 2.0;
    h(0, 1) = h(1, 0) = hw2 / 2.0;
    h(2, 2) = p.detuning + beta3 / 2.0;
    h(3, 3) = p.detuning - beta3 / 2.0;
    h(2, 3) = h(3, 2) = hw3 / 2.0;
    h(0, 2) = h(2, 0) = hbar * p.Omega_R;
    h(1, 3) = h(3, 1) = hbar * p.Omega_L;
    return h;
}

double qubit_beta(Qubit q, const PhysicalParams& p) {
    return q == Qubit::DE ? magnetic_energy(p.g_e - p.g_h, p.B)
                          : magnetic_energy(p.g_2h, p.B);
}

double mixing_angle(Qubit q, const PhysicalParams& p) {
    const double beta = qubit_beta(q, p);
    const double hw = hbar * (q == Qubit::DE ? p.omega2 : p.omega3);
    if (beta == 0.0 && hw == 0.0) return 0.0;  // removable atan(0/0)
    return std::atan2(beta, hw);
}

double qubit_splitting(Qubit q, const PhysicalParams& p) {
    const double beta = qubit_beta(q, p);
    const double hw = hbar * (q == Qubit::DE ? p.omega2 : p.omega3);
    return std::hypot(beta, hw);
}

QubitEigenpair qubit_eigensystem(Qubit q, const PhysicalParams& p) {
    QubitEigenpair e;
    e.theta_B = mixing_angle(q, p);
    e.delta_B = qubit_splitting(q, p);

    const double center = q == Qubit::XX ? p.delta_xx : 0.0;
    e.e_minus = center - e.delta_B / 2.0;
    e.e_plus = center + e.delta_B / 2.0;

    const double quarter = std::numbers::pi / 4.0;
    // Lower state: cos(pi/4 - theta/2)|+i> - sin(pi/4 - theta/2)|-i>,
    // upper: cos(pi/4 + theta/2)|+i> + sin(pi/4 + theta/2)|-i>. Both have a
    // non-negative |+i> coefficient for theta in (-pi/2, pi/2); at the
    // degenerate endpoints the sign convention falls back to |-i>.
    e.v_minus << std::cos(quarter - e.theta_B / 2.0), -std::sin(quarter - e.theta_B / 2.0);
    e.v_plus << std::cos(quarter + e.theta_B / 2.0), std::sin(quarter + e.theta_B / 2.0);

    auto fix_phase = [](Eigen::Vector2cd& v) {
        double lead = v(0).real();
        if (lead == 0.0) lead = v(1).real();
        if (lead < 0.0) v = -v;
    };
    fix_phase(e.v_minus);
    fix_phase(e.v_plus);
    return e;
}

double zeeman_line_splitting(Line line, const PhysicalParams& p) {
    switch (line) {
        case Line::X0:
            return std::hypot(p.hbar_omega0, magnetic_energy(p.g_e + p.g_h, p.B));
        case Line::Xpm:
            return magnetic_energy(p.g_e + p.g_h, p.B);
        case Line::XXT3:
            return magnetic_energy(p.g_2h + p.g_e - p.g_h_star, p.B);
        case Line::XD:
            return magnetic_energy(p.g_e - p.g_h, p.B);
    }
    throw UnknownLine("invalid line enum value");
}

std::string line_name(Line line) {
    switch (line) {
        case Line::X0: return "X0";
        case Line::Xpm: return "Xpm";
        case Line::XXT3: return "XXT3";
        case Line::XD: return "XD";
    }
    throw UnknownLine("invalid line enum value");
}

Line parse_line(const std::string& name) {
    if (name == "X0") return Line::X0;
    if (name == "Xpm") return Line::Xpm;
    if (name == "XXT3") return Line::XXT3;
    if (name == "XD") return Line::XD;
    throw UnknownLine(name);
}

}  // namespace qd
