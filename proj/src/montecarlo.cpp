#include "qdsim/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "qdsim/constants.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/rng.hpp"

namespace qd {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

constexpr complex<double> kI{0.0, 1.0};

// Spectral form of exp(-i H_eff t / hbar) so the no-jump norm can be
// evaluated and root-found in closed form per segment.
struct EffectiveEvolution {
    int n = 0;
    MatrixXcd S, Sinv;
    VectorXcd evals;                  // ueV, Im <= 0
    std::vector<MatrixXcd> jump_ops;  // sqrt(rate) * op
};

EffectiveEvolution make_effective(const LevelModel& m) {
    EffectiveEvolution eff;
    eff.n = m.dim();
    MatrixXcd heff = m.H;
    for (const auto& ch : m.channels) {
        MatrixXcd Lk = std::sqrt(ch.rate) * ch.op;
        heff -= 0.5 * kI * PhysicalConstants::hbar * (Lk.adjoint() * Lk);
        eff.jump_ops.push_back(std::move(Lk));
    }
    Eigen::ComplexEigenSolver<MatrixXcd> es(heff);
    if (es.info() != Eigen::Success)
        throw PropagationUnstable("effective Hamiltonian eigensolver failed");
    eff.S = es.eigenvectors();
    eff.evals = es.eigenvalues();
    Eigen::PartialPivLU<MatrixXcd> lu(eff.S);
    eff.Sinv = lu.inverse();
    const double err =
        (eff.S * eff.evals.asDiagonal() * eff.Sinv - heff).norm() / std::max(heff.norm(), 1e-300);
    if (!(err <= 1e-8))
        throw PropagationUnstable("effective Hamiltonian is defective");
    return eff;
}

// Unnormalized no-jump state dt after a segment start whose eigenbasis
// coefficients are w.
VectorXcd state_at(const EffectiveEvolution& eff, const VectorXcd& w, double dt) {
    VectorXcd we(eff.n);
    for (int i = 0; i < eff.n; ++i)
        we(i) = w(i) * std::exp(-kI * eff.evals(i) * (dt / PhysicalConstants::hbar));
    return eff.S * we;
}

double norm2_at(const EffectiveEvolution& eff, const VectorXcd& w, double dt) {
    return state_at(eff, w, dt).squaredNorm();
}

double dnorm2_at(const EffectiveEvolution& eff, const VectorXcd& w, double dt) {
    VectorXcd we(eff.n), dwe(eff.n);
    for (int i = 0; i < eff.n; ++i) {
        const complex<double> mu = -kI * eff.evals(i) / PhysicalConstants::hbar;
        we(i) = w(i) * std::exp(mu * dt);
        dwe(i) = mu * we(i);
    }
    const VectorXcd psi = eff.S * we;
    const VectorXcd dpsi = eff.S * dwe;
    return 2.0 * psi.dot(dpsi).real();
}

// Solve norm2(dt) = r on (0, hi]. The norm is monotone non-increasing, so a
// bisection bracket stays valid and Newton steps are safeguarded against it.
double jump_time(const EffectiveEvolution& eff, const VectorXcd& w, double r, double hi) {
    double lo = 0.0;
    const double gamma0 = -dnorm2_at(eff, w, 0.0);
    double t = gamma0 > 0.0 ? std::min(hi, -std::log(r) / gamma0) : 0.5 * hi;
    if (!(t > lo && t < hi)) t = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double g = norm2_at(eff, w, t) - r;
        if (std::abs(g) < 1e-14) break;
        if (g > 0.0)
            lo = t;
        else
            hi = t;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
        const double gp = dnorm2_at(eff, w, t);
        double tn = (gp < 0.0) ? t - g / gp : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
    }
    return t;
}

// Called once per no-jump segment with the absolute start time, the
// eigenbasis coefficients at the start, and the segment length.
using SegmentSink = std::function<void(double t0, const VectorXcd& w, double len)>;

void run_trajectory(const EffectiveEvolution& eff, const VectorXcd& psi0, double t_max, Rng& rng,
                    std::vector<JumpEvent>& jumps, const SegmentSink& segment) {
    VectorXcd psi = psi0;
    double t0 = 0.0;
    while (t0 < t_max) {
        const VectorXcd w = eff.Sinv * psi;
        const double r = rng.uniform_pos();
        const double remaining = t_max - t0;
        if (norm2_at(eff, w, remaining) > r) {
            if (segment) segment(t0, w, remaining);
            break;
        }
        const double dt = jump_time(eff, w, r, remaining);
        if (segment) segment(t0, w, dt);

        const VectorXcd pre = state_at(eff, w, dt);
        double total = 0.0;
        std::vector<double> weights(eff.jump_ops.size());
        for (size_t k = 0; k < eff.jump_ops.size(); ++k) {
            weights[k] = (eff.jump_ops[k] * pre).squaredNorm();
            total += weights[k];
        }
        if (!(total > 0.0)) break;  // decay-free subspace reached
        double u = rng.uniform() * total;
        size_t pick = weights.size() - 1;
        for (size_t k = 0; k < weights.size(); ++k) {
            u -= weights[k];
            if (u <= 0.0) {
                pick = k;
                break;
            }
        }
        psi = eff.jump_ops[pick] * pre;
        psi /= psi.norm();
        t0 += dt;
        jumps.push_back(JumpEvent{t0, static_cast<int>(pick)});
    }
}

struct InitialEnsemble {
    std::vector<VectorXcd> states;
    std::vector<double> cumulative;
};

InitialEnsemble decompose_initial(const MatrixXcd& rho0) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho0);
    if (es.info() != Eigen::Success)
        throw NonPhysicalSteadyState("initial density matrix eigensolver failed");
    InitialEnsemble ens;
    double total = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double p = es.eigenvalues()(i);
        if (p < -1e-7) throw NonPhysicalSteadyState("initial state has negativity");
        if (p <= 0.0) continue;
        ens.states.push_back(es.eigenvectors().col(i));
        total += p;
        ens.cumulative.push_back(total);
    }
    if (ens.states.empty()) throw NonPhysicalSteadyState("initial state has zero trace");
    for (double& c : ens.cumulative) c /= total;
    ens.cumulative.back() = 1.0;
    return ens;
}

const VectorXcd& draw_initial(const InitialEnsemble& ens, Rng& rng) {
    const double u = rng.uniform();
    for (size_t i = 0; i < ens.cumulative.size(); ++i)
        if (u < ens.cumulative[i]) return ens.states[i];
    return ens.states.back();
}

// Shared driver: per-index trajectories on a small pool, worker exceptions
// re-thrown on the calling thread.
void run_pool(const LevelModel& m, const MatrixXcd& rho0, const McOptions& opt,
              const std::function<void(std::uint64_t, const EffectiveEvolution&, Rng&,
                                       const InitialEnsemble&)>& body) {
    const EffectiveEvolution eff = make_effective(m);
    const InitialEnsemble ens = decompose_initial(rho0);
    const int jobs = std::max(1, opt.jobs);
    std::atomic<std::uint64_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;

    auto worker = [&]() {
        try {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= opt.n_traj) return;
                Rng rng(stream_seed(opt.seed, i));
                body(i, eff, rng, ens);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace

void mc_trajectories(const LevelModel& m, const MatrixXcd& rho0, const McOptions& opt,
                     const TrajectorySink& sink) {
    std::mutex sink_mu;
    run_pool(m, rho0, opt,
             [&](std::uint64_t i, const EffectiveEvolution& eff, Rng& rng,
                 const InitialEnsemble& ens) {
                 const VectorXcd psi0 = draw_initial(ens, rng);
                 std::vector<JumpEvent> jumps;
                 run_trajectory(eff, psi0, opt.t_max, rng, jumps, nullptr);
                 if (sink) {
                     std::lock_guard<std::mutex> lock(sink_mu);
                     sink(i, jumps);
                 }
             });
}

Eigen::MatrixXd mc_populations(const LevelModel& m, const MatrixXcd& rho0, const McOptions& opt,
                               const std::vector<double>& ts) {
    for (size_t i = 0; i < ts.size(); ++i)
        if (ts[i] < 0.0 || ts[i] > opt.t_max || (i > 0 && ts[i] < ts[i - 1]))
            throw GridMismatch("sample grid must be sorted within [0, t_max]");

    const int n = m.dim();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<int>(ts.size()), n);
    std::mutex acc_mu;

    run_pool(m, rho0, opt,
             [&](std::uint64_t, const EffectiveEvolution& eff, Rng& rng,
                 const InitialEnsemble& ens) {
                 const VectorXcd psi0 = draw_initial(ens, rng);
                 Eigen::MatrixXd local = Eigen::MatrixXd::Zero(static_cast<int>(ts.size()), n);
                 size_t cursor = 0;
                 auto segment = [&](double t0, const VectorXcd& w, double len) {
                     while (cursor < ts.size() && ts[cursor] <= t0 + len + 1e-12) {
                         const VectorXcd psi = state_at(eff, w, ts[cursor] - t0);
                         const double nrm2 = psi.squaredNorm();
                         for (int l = 0; l < n; ++l)
                             local(static_cast<int>(cursor), l) += std::norm(psi(l)) / nrm2;
                         ++cursor;
                     }
                 };
                 std::vector<JumpEvent> jumps;
                 run_trajectory(eff, psi0, opt.t_max, rng, jumps, segment);
                 std::lock_guard<std::mutex> lock(acc_mu);
                 acc += local;
             });

    return acc / static_cast<double>(opt.n_traj);
}

}  // namespace qd
