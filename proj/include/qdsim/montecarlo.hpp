#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "qdsim/levelmodel.hpp"

namespace qd {

struct JumpEvent {
    double t = 0.0;   // ns since trajectory start
    int channel = 0;  // index into LevelModel::channels
};

struct McOptions {
    double t_max = 100.0;       // ns per trajectory
    std::uint64_t n_traj = 1000;
    std::uint64_t seed = 1;
    int jobs = 1;               // worker threads; results independent of jobs
};

// Per-trajectory callback. Invoked once per finished trajectory with its
// index and the ordered jump record; serialized by an internal mutex.
using TrajectorySink = std::function<void(std::uint64_t index, const std::vector<JumpEvent>&)>;

// Unravels the master equation of `m` into quantum-jump trajectories using
// the waiting-time algorithm: evolve under H_eff = H - (i hbar/2) sum L_k^+L_k,
// root-find the time where the squared norm hits a uniform draw, then jump
// through channel k with probability ||L_k psi||^2 / sum_j ||L_j psi||^2.
// Initial states are drawn from the eigendecomposition of `rho0`.
// Trajectory i uses an independent generator seeded from (seed, i), so the
// event stream is bit-identical for any `jobs`.
void mc_trajectories(const LevelModel& m, const Eigen::MatrixXcd& rho0, const McOptions& opt,
                     const TrajectorySink& sink);

// Ensemble-averaged level populations on a time grid, for convergence checks
// against the master equation.
Eigen::MatrixXd mc_populations(const LevelModel& m, const Eigen::MatrixXcd& rho0,
                               const McOptions& opt, const std::vector<double>& ts);

}  // namespace qd
