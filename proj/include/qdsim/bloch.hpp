#pragma once

#include "qdsim/polarization.hpp"

namespace qd {

// Pure qubit state on the eigenstate Bloch sphere: |psi> =
// cos(theta/2)|lower> + exp(-i phi) sin(theta/2)|upper>.
struct BlochState {
    double theta = 0.0;  // polar angle, [0, pi]
    double phi = 0.0;    // azimuthal angle, stored wrapped to [0, 2 pi)
};

// Free precession about the eigenaxis: phi(t) = phi(0) - (delta/hbar) t,
// theta unchanged. delta in ueV, t in ns.
BlochState bloch_evolve(const BlochState& s, double delta, double t);

// State right after detecting a polarized photon, relative to the
// field-tilted eigenaxis: R -> (pi/2 - theta_B, 0), L -> the antipode
// (pi/2 + theta_B, pi).
BlochState heralded_initial_state(Pol pol, double theta_B);

// Undamped degree of circular polarization after an R herald:
// cos^2(x) - sin^2(x) cos(2 theta_B), x = delta2 tau / (2 hbar).
double dcp_ideal(double tau, double delta2, double theta_B);

// Damped form A_V * dcp_ideal * exp(-tau / T_D). Throws DomainError when
// T_D <= 0. A_V is not range-checked so fits may explore A_V > 1.
double dcp_damped(double tau, double delta2, double theta_B, double A_V, double T_D);

// Oscillation visibility A' cos^2(theta_B).
double visibility(double theta_B, double A_Vprime);

}  // namespace qd
