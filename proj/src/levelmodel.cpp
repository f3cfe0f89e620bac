#include "qdsim/levelmodel.hpp"

#include "qdsim/spinmodel.hpp"

namespace qd {

Variant parse_variant(const std::string& name) {
    if (name == "resonant") return Variant::resonant;
    if (name == "quasi_resonant") return Variant::quasi_resonant;
    throw SchemaError("unknown model variant '" + name + "'");
}

std::string variant_name(Variant v) {
    return v == Variant::resonant ? "resonant" : "quasi_resonant";
}

const char* level_name(Level l) {
    switch (l) {
        case Level::Vacuum: return "Vacuum";
        case Level::DEp2: return "DE+2";
        case Level::DEm2: return "DE-2";
        case Level::XXp3: return "XX+3";
        case Level::XXm3: return "XX-3";
        case Level::Charge: return "Charge";
        case Level::XXp3s: return "XX+3*";
        case Level::XXm3s: return "XX-3*";
    }
    return "?";
}

int LevelModel::index_of(Level l) const {
    for (int i = 0; i < dim(); ++i)
        if (levels[static_cast<size_t>(i)] == l) return i;
    return -1;
}

const CollapseChannel* LevelModel::channel(const std::string& label) const {
    for (const auto& c : channels)
        if (c.label == label) return &c;
    return nullptr;
}

LevelModel build_level_model(const PhysicalParams& raw, Variant v) {
    const PhysicalParams p = validate_params(raw);

    const bool charge_active = p.c_charge * p.G_b > 0.0 || p.c_discharge * p.G_b > 0.0;
    const bool quasi = v == Variant::quasi_resonant;

    LevelModel m;
    m.levels = {Level::Vacuum, Level::DEp2, Level::DEm2, Level::XXp3, Level::XXm3};
    if (charge_active) m.levels.push_back(Level::Charge);
    if (quasi) {
        m.levels.push_back(Level::XXp3s);
        m.levels.push_back(Level::XXm3s);
    }

    const int n = m.dim();
    const int vac = m.index_of(Level::Vacuum);
    const int p2 = m.index_of(Level::DEp2);
    const int m2 = m.index_of(Level::DEm2);
    const int p3 = m.index_of(Level::XXp3);
    const int m3 = m.index_of(Level::XXm3);
    const int chg = m.index_of(Level::Charge);
    const int p3s = m.index_of(Level::XXp3s);
    const int m3s = m.index_of(Level::XXm3s);

    const double beta2 = magnetic_energy(p.g_e - p.g_h, p.B);
    const double beta3 = magnetic_energy(p.g_2h, p.B);
    const double hw2 = hbar * p.omega2;
    const double hw3 = hbar * p.omega3;

    m.H = Eigen::MatrixXcd::Zero(n, n);
    m.H(p2, p2) = -beta2 / 2.0;
    m.H(m2, m2) = beta2 / 2.0;
    m.H(p2, m2) = m.H(m2, p2) = hw2 / 2.0;
    m.H(p3, p3) = p.detuning + beta3 / 2.0;
    m.H(m3, m3) = p.detuning - beta3 / 2.0;
    m.H(p3, m3) = m.H(m3, p3) = hw3 / 2.0;
    if (quasi) {
        m.H(p3s, p3s) = p.detuning + beta3 / 2.0;
        m.H(m3s, m3s) = p.detuning - beta3 / 2.0;
        m.H(p3s, m3s) = m.H(m3s, p3s) = hw3 / 2.0;
        m.H(p2, p3s) = m.H(p3s, p2) = hbar * p.Omega_R;
        m.H(m2, m3s) = m.H(m3s, m2) = hbar * p.Omega_L;
    } else {
        m.H(p2, p3) = m.H(p3, p2) = hbar * p.Omega_R;
        m.H(m2, m3) = m.H(m3, m2) = hbar * p.Omega_L;
    }

    auto transition = [n](int to, int from) {
        Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(n, n);
        op(to, from) = 1.0;
        return op;
    };
    auto add = [&](const std::string& label, int to, int from, double rate) {
        m.channels.push_back({label, transition(to, from), rate});
    };

    add("emit_R", p2, p3, p.gamma_xx);
    add("emit_L", m2, m3, p.gamma_xx);
    add("de_decay_p2", vac, p2, p.gamma_x);
    add("de_decay_m2", vac, m2, p.gamma_x);
    add("pump_p2", p2, vac, p.G_b / 2.0);
    add("pump_m2", m2, vac, p.G_b / 2.0);
    if (charge_active) {
        add("charge_in_p2", chg, p2, p.c_charge * p.G_b);
        add("charge_in_m2", chg, m2, p.c_charge * p.G_b);
        add("charge_out", vac, chg, p.c_discharge * p.G_b);
    }
    if (quasi) {
        add("relax_p3", p3, p3s, p.gamma_relax);
        add("relax_m3", m3, m3s, p.gamma_relax);
    }
    return m;
}

}  // namespace qd
