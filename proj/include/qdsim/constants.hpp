#pragma once

namespace qd {

// Unit system used throughout: energies in ueV, times in ns, rates in 1/ns,
// angular frequencies in rad/ns, magnetic field in T. hbar is kept explicit
// so tabulated energies appear literally in code and tests.
struct PhysicalConstants {
    static constexpr double mu_B = 57.8838180;  // Bohr magneton, ueV/T
    static constexpr double hbar = 0.6582120;   // reduced Planck constant, ueV*ns
};

inline constexpr double mu_B = PhysicalConstants::mu_B;
inline constexpr double hbar = PhysicalConstants::hbar;

// Zeeman energy beta = mu_B * g * B in ueV. Exactly linear in g and B.
constexpr double magnetic_energy(double g, double B) { return mu_B * g * B; }

}  // namespace qd
