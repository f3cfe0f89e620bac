#pragma once

namespace qd {

// Circular photon polarization. R heralds/addresses the |+2> <-> |+3>
// transition, L the |-2> <-> |-3> one.
enum class Pol { R, L };

constexpr Pol opposite(Pol p) { return p == Pol::R ? Pol::L : Pol::R; }
constexpr const char* pol_name(Pol p) { return p == Pol::R ? "R" : "L"; }

}  // namespace qd
