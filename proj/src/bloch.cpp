#include "qdsim/bloch.hpp"

#include <cmath>
#include <numbers>

#include "qdsim/constants.hpp"
#include "qdsim/errors.hpp"

namespace qd {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_phi(double phi) {
    double w = std::fmod(phi, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}
}  // namespace

BlochState bloch_evolve(const BlochState& s, double delta, double t) {
    return {s.theta, wrap_phi(s.phi - delta / hbar * t)};
}

BlochState heralded_initial_state(Pol pol, double theta_B) {
    if (pol == Pol::R) return {std::numbers::pi / 2.0 - theta_B, 0.0};
    return {std::numbers::pi / 2.0 + theta_B, std::numbers::pi};
}

double dcp_ideal(double tau, double delta2, double theta_B) {
    const double x = delta2 * tau / (2.0 * hbar);
    const double c = std::cos(x);
    const double s = std::sin(x);
    return c * c - s * s * std::cos(2.0 * theta_B);
}

double dcp_damped(double tau, double delta2, double theta_B, double A_V, double T_D) {
    if (!(T_D > 0.0)) throw DomainError("dcp_damped requires T_D > 0");
    return A_V * dcp_ideal(tau, delta2, theta_B) * std::exp(-tau / T_D);
}

double visibility(double theta_B, double A_Vprime) {
    const double c = std::cos(theta_B);
    return A_Vprime * c * c;
}

}  // namespace qd
