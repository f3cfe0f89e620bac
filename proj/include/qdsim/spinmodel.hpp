#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "qdsim/params.hpp"

namespace qd {

// Fixed 4-level spin basis order: |+2>, |-2>, |+3>, |-3>.
inline constexpr std::array<const char*, 4> spin_basis4 = {"+2", "-2", "+3", "-3"};

enum class Qubit { DE, XX };
enum class Line { X0, Xpm, XXT3, XD };

using Matrix4 = Eigen::Matrix4cd;

struct QubitEigenpair {
    double e_minus = 0.0;         // ueV, e_minus <= e_plus
    double e_plus = 0.0;
    Eigen::Vector2cd v_minus;     // unit vectors over {|+i>, |-i>}
    Eigen::Vector2cd v_plus;
    double theta_B = 0.0;         // mixing angle, rad
    double delta_B = 0.0;         // splitting sqrt(beta^2 + (hbar*omega)^2), ueV
};

// Static block-diagonal Hamiltonian over spin_basis4, in ueV. DE block
// (-beta2/2 on |+2>) with hbar*omega2/2 off-diagonal; XX block diagonal
// delta_xx +- beta3 with hbar*omega3/2 off-diagonal.
Matrix4 build_h4(const PhysicalParams& p);

// Rotating-frame Hamiltonian with circularly polarized Rabi coupling, ueV.
// Same DE block; XX block diagonal detuning +- beta3/2 (the driven form
// carries half the static XX Zeeman gap); coupling hbar*Omega_R between
// |+2> and |+3>, hbar*Omega_L between |-2> and |-3>.
Matrix4 build_h_driven(const PhysicalParams& p);

// Zeeman energy of the requested qubit: beta2 = mu_B (g_e - g_h) B,
// beta3 = mu_B g_2h B.
double qubit_beta(Qubit q, const PhysicalParams& p);

// theta_B = atan(beta_i / (hbar omega_i)), defined as 0 when both vanish.
double mixing_angle(Qubit q, const PhysicalParams& p);

// Delta_i(B) = sqrt(beta_i^2 + (hbar omega_i)^2), ueV.
double qubit_splitting(Qubit q, const PhysicalParams& p);

// Closed-form eigensystem of the qubit normal form
//   [[c - beta/2, hw/2], [hw/2, c + beta/2]]
// (c = 0 for DE, delta_xx for XX). Phase convention: the |+i> coefficient is
// real and non-negative; if it vanishes, the |-i> coefficient is.
QubitEigenpair qubit_eigensystem(Qubit q, const PhysicalParams& p);

// Signed Zeeman splitting of a spectral line, ueV:
//   X0   -> sqrt(hbar_omega0^2 + (mu_B (g_e + g_h) B)^2)
//   Xpm  -> mu_B (g_e + g_h) B
//   XXT3 -> mu_B (g_2h + g_e - g_h_star) B
//   XD   -> mu_B (g_e - g_h) B
double zeeman_line_splitting(Line line, const PhysicalParams& p);

std::string line_name(Line line);
Line parse_line(const std::string& name);  // throws UnknownLine

}  // namespace qd
