#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qdsim/config.hpp"
#include "qdsim/levelmodel.hpp"
#include "qdsim/params.hpp"
#include "qdsim/polarization.hpp"

namespace qd {

struct GridConfig {
    double tau_max = 25.0;          // ns
    int tau_points = 1250;          // samples on [0, tau_max]
    std::vector<double> B_list = {0.0};  // T
};

struct DetectorConfig {
    double irf_fwhm = 0.45;  // ns, Gaussian response FWHM; 0 disables
};

struct OutputConfig {
    int precision = 10;  // significant digits in CSV cells
};

struct RunSection {
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct McSection {
    std::uint64_t n_traj = 100000;
    double t_max = 15.0;     // ns per trajectory
    double bin_width = 0.25; // ns, pair-delay histogram
    double tau_max = 15.0;   // ns, histogram span
    std::uint64_t max_jump_rows = 10000;  // cap on the raw jump-record CSV
};

struct FitSection {
    std::string model = "dcp_damped";  // or g2_numeric
    std::vector<std::string> free = {"A_V", "T_D", "theta_B", "delta2"};
    std::string observable = "dcp";    // data column to fit
    std::map<std::string, double> init;
    std::map<std::string, std::pair<double, double>> bounds;
};

// Full run description; round-trips through the config dialect. Unknown
// sections or keys are SchemaErrors so typos cannot silently fall back to
// defaults.
struct RunConfig {
    PhysicalParams params;
    Variant variant = Variant::resonant;
    Pol herald = Pol::R;
    GridConfig grid;
    DetectorConfig detector;
    OutputConfig output;
    RunSection run;
    McSection mc;
    FitSection fit;

    static RunConfig from_doc(const ConfigDoc& doc);
    ConfigDoc to_doc() const;
    std::uint64_t hash() const;  // FNV-1a of the serialized effective config

    std::vector<double> tau_grid() const;  // uniform [0, tau_max], tau_points samples
};

}  // namespace qd
