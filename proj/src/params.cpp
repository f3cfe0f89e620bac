#include "qdsim/params.hpp"

#include <cmath>

namespace qd {

const std::vector<ParamField>& param_fields() {
    static const std::vector<ParamField> fields = {
        {"g_e", &PhysicalParams::g_e},
        {"g_h", &PhysicalParams::g_h},
        {"g_2h", &PhysicalParams::g_2h},
        {"g_h_star", &PhysicalParams::g_h_star},
        {"omega2", &PhysicalParams::omega2},
        {"omega3", &PhysicalParams::omega3},
        {"delta_xx", &PhysicalParams::delta_xx},
        {"gamma_xx", &PhysicalParams::gamma_xx},
        {"gamma_x", &PhysicalParams::gamma_x},
        {"gamma_relax", &PhysicalParams::gamma_relax},
        {"G_b", &PhysicalParams::G_b},
        {"c_charge", &PhysicalParams::c_charge},
        {"c_discharge", &PhysicalParams::c_discharge},
        {"Omega_R", &PhysicalParams::Omega_R},
        {"Omega_L", &PhysicalParams::Omega_L},
        {"detuning", &PhysicalParams::detuning},
        {"B", &PhysicalParams::B},
        {"hbar_omega0", &PhysicalParams::hbar_omega0},
    };
    return fields;
}

bool is_param_field(const std::string& name) { return find_param_field(name) != nullptr; }

const ParamField* find_param_field(const std::string& name) {
    for (const auto& f : param_fields())
        if (name == f.name) return &f;
    return nullptr;
}

PhysicalParams validate_params(const PhysicalParams& p) {
    std::vector<ParamViolation> v;

    for (const auto& f : param_fields()) {
        if (!std::isfinite(p.*(f.member))) v.push_back({"NonFiniteValue", f.name});
    }

    // Fields that must be non-negative: decay/pump rates, Rabi and precession
    // rates, the charge multipliers that scale G_b. B and the g-factors are
    // signed; detuning and delta_xx are signed energies.
    static const std::vector<const char*> nonneg = {
        "omega2", "omega3", "gamma_xx", "gamma_x", "gamma_relax",
        "G_b", "c_charge", "c_discharge", "Omega_R", "Omega_L",
    };
    for (const auto& f : param_fields()) {
        for (const char* name : nonneg) {
            if (std::string(f.name) == name && std::isfinite(p.*(f.member)) &&
                p.*(f.member) < 0.0) {
                v.push_back({"NegativeRate", f.name});
            }
        }
    }

    if (!v.empty()) throw ParamValidationError(std::move(v));
    return p;
}

}  // namespace qd
