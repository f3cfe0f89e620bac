#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qdsim/levelmodel.hpp"

namespace qd {

// Vectorization is column-major: vec(rho) stacks columns, vec(A rho B) =
// kron(B^T, A) vec(rho).
struct Liouvillian {
    Eigen::MatrixXcd matrix;  // n^2 x n^2, rad/ns
    int dim = 0;              // n
};

// L[rho] = -(i/hbar)[H, rho] + sum_k (L_k rho L_k^+ - {L_k^+ L_k, rho}/2)
// with L_k = sqrt(rate_k) * op_k.
Liouvillian build_liouvillian(const LevelModel& m);

inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}
inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int n) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

// Unique stationary density matrix from the one-dimensional kernel of L.
// Throws DegenerateKernel when the kernel dimension differs from one and
// NonPhysicalSteadyState when the normalized kernel vector is not a valid
// state (negativity beyond 1e-7).
Eigen::MatrixXcd steady_state(const Liouvillian& L);

// exp(L t) evaluated through the spectral decomposition of L, with a
// scaling-and-squaring matrix exponential fallback when L is defective
// (eigenvector reconstruction error above 1e-8 relative).
class Propagator {
public:
    explicit Propagator(const Liouvillian& L);

    bool spectral() const { return spectral_; }
    const Eigen::VectorXcd& eigenvalues() const { return lam_; }
    int dim() const { return n_; }

    // exp(L t) v for one initial vector and many times; the eigenbasis
    // projection of v is computed once.
    std::vector<Eigen::VectorXcd> apply_many(const Eigen::VectorXcd& v,
                                             const std::vector<double>& ts) const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v, double t) const;

private:
    int n_ = 0;
    Eigen::MatrixXcd L_;
    Eigen::MatrixXcd V_, Vinv_;
    Eigen::VectorXcd lam_;
    bool spectral_ = false;
};

// Density-matrix trajectory rho(tau) = exp(L tau)[rho0]. Grid must be sorted
// and non-negative. Throws PropagationUnstable when any output trace drifts
// from one by more than 1e-6.
std::vector<Eigen::MatrixXcd> propagate(const Liouvillian& L, const Eigen::MatrixXcd& rho0,
                                        const std::vector<double>& taus);

}  // namespace qd
