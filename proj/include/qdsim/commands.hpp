#pragma once

#include <string>
#include <vector>

#include "qdsim/runconfig.hpp"

namespace qd {

// Subcommand bodies shared by the CLI binary and the test suites. Each
// writes its CSV outputs plus the effective config into out_dir and returns
// the process exit code; configuration and solver failures propagate as
// qd::Error and are mapped to exit codes by the caller.

// Zeeman splittings of the four spectral lines and the two qubit
// eigensystems over the configured B sweep.
int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir);

// Polarization-resolved g2 / DCP curves (raw and detector-convolved) plus the
// heralded spin readout, one file set per B value.
int cmd_g2(const RunConfig& cfg, const std::string& out_dir);

// Least-squares fits of the configured model to curve CSVs; writes a report
// in the config dialect, per-file residual CSVs, and a sweep summary.
// Returns 4 when any fit fails to converge.
int cmd_fit(const RunConfig& cfg, const std::vector<std::string>& data_files,
            const std::string& out_dir);

// Quantum-jump oracle: pair-delay histograms per polarization ordering with
// the regression-theorem prediction and per-bin deviation in statistical
// sigma, plus a capped raw jump record.
int cmd_mc(const RunConfig& cfg, const std::string& out_dir);

}  // namespace qd
