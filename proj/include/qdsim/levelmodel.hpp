#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qdsim/params.hpp"

namespace qd {

enum class Variant { resonant, quasi_resonant };

Variant parse_variant(const std::string& name);  // throws SchemaError
std::string variant_name(Variant v);

enum class Level { Vacuum, DEp2, DEm2, XXp3, XXm3, Charge, XXp3s, XXm3s };

const char* level_name(Level l);

// Single dissipation pathway. op has exactly one nonzero entry of magnitude
// one; the Lindblad operator is sqrt(rate) * op.
struct CollapseChannel {
    std::string label;
    Eigen::MatrixXcd op;
    double rate = 0.0;  // 1/ns
};

struct LevelModel {
    std::vector<Level> levels;        // ordered basis
    Eigen::MatrixXcd H;               // ueV, dim x dim
    std::vector<CollapseChannel> channels;

    int dim() const { return static_cast<int>(levels.size()); }
    int index_of(Level l) const;                      // -1 when absent
    const CollapseChannel* channel(const std::string& label) const;  // null when absent
};

// Dissipative level scheme around the driven 4-level spin core.
//
// resonant: {Vacuum, DE+-2, XX+-3} plus Charge when either charge rate
// c_charge*G_b or c_discharge*G_b is nonzero (with both zero the charge level
// is disconnected and would only degenerate the steady state). Channels:
// emit_R/emit_L (XX -> DE at gamma_xx), de_decay_p2/m2 (DE -> Vacuum at
// gamma_x), pump_p2/m2 (Vacuum -> DE at G_b/2 each), charge_in_p2/m2
// (DE -> Charge at c_charge*G_b), charge_out (Charge -> Vacuum at
// c_discharge*G_b).
//
// quasi_resonant: adds XX+-3* mirroring the XX block; the Rabi coupling
// drives DE <-> XX* instead of DE <-> XX, and relax_p3/relax_m3 channels
// (XX* -> XX at gamma_relax) close the cascade.
LevelModel build_level_model(const PhysicalParams& p, Variant v);

}  // namespace qd
