#include "qdsim/liouville.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qdsim/constants.hpp"
#include "qdsim/errors.hpp"

namespace qd {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

Liouvillian build_liouvillian(const LevelModel& m) {
    const int n = m.dim();
    const MatrixXcd id = MatrixXcd::Identity(n, n);
    const complex<double> ihbar_inv(0.0, -1.0 / PhysicalConstants::hbar);

    MatrixXcd L = ihbar_inv * (Eigen::kroneckerProduct(id, m.H).eval() -
                               Eigen::kroneckerProduct(m.H.transpose(), id).eval());

    for (const auto& ch : m.channels) {
        const MatrixXcd Lk = std::sqrt(ch.rate) * ch.op;
        const MatrixXcd LdL = Lk.adjoint() * Lk;
        L += Eigen::kroneckerProduct(Lk.conjugate(), Lk).eval();
        L -= 0.5 * Eigen::kroneckerProduct(id, LdL).eval();
        L -= 0.5 * Eigen::kroneckerProduct(LdL.transpose(), id).eval();
    }
    return Liouvillian{std::move(L), n};
}

Eigen::MatrixXcd steady_state(const Liouvillian& L) {
    const int n = L.dim;
    Eigen::BDCSVD<MatrixXcd> svd(L.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0);
    int kernel = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) < cutoff) ++kernel;
    if (kernel != 1)
        throw DegenerateKernel("stationary subspace has dimension " + std::to_string(kernel) +
                               ", expected 1");

    MatrixXcd rho = unvec(svd.matrixV().col(sv.size() - 1), n);
    rho = 0.5 * (rho + rho.adjoint()).eval();  // kernel vector is Hermitian up to noise
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-14)
        throw NonPhysicalSteadyState("stationary kernel vector is traceless");
    rho /= tr;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-7)
        throw NonPhysicalSteadyState("stationary state has negativity " +
                                     std::to_string(-min_eig));
    return rho;
}

Propagator::Propagator(const Liouvillian& L) : n_(L.dim), L_(L.matrix) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(L_);
    if (es.info() == Eigen::Success) {
        V_ = es.eigenvectors();
        lam_ = es.eigenvalues();
        Eigen::PartialPivLU<MatrixXcd> lu(V_);
        Vinv_ = lu.inverse();
        const double scale = std::max(L_.norm(), 1e-300);
        const double err = (V_ * lam_.asDiagonal() * Vinv_ - L_).norm() / scale;
        spectral_ = std::isfinite(err) && err <= 1e-8;
    }
}

std::vector<VectorXcd> Propagator::apply_many(const VectorXcd& v,
                                              const std::vector<double>& ts) const {
    std::vector<VectorXcd> out;
    out.reserve(ts.size());
    if (spectral_) {
        const VectorXcd w0 = Vinv_ * v;
        for (double t : ts) {
            VectorXcd w = w0;
            for (int i = 0; i < w.size(); ++i) w(i) *= std::exp(lam_(i) * t);
            out.push_back(V_ * w);
        }
        return out;
    }
    // Defective generator: scaling-and-squaring exponential per unique step.
    for (size_t i = 0; i < ts.size(); ++i) {
        const MatrixXcd E = (L_ * ts[i]).exp();
        out.push_back(E * v);
    }
    return out;
}

VectorXcd Propagator::apply(const VectorXcd& v, double t) const {
    return apply_many(v, {t}).front();
}

std::vector<Eigen::MatrixXcd> propagate(const Liouvillian& L, const Eigen::MatrixXcd& rho0,
                                        const std::vector<double>& taus) {
    const int n = L.dim;
    if (rho0.rows() != n || rho0.cols() != n)
        throw GridMismatch("initial state dimension does not match generator");
    for (size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] < 0.0 || (i > 0 && taus[i] < taus[i - 1]))
            throw GridMismatch("propagation grid must be sorted and non-negative");
    }

    Propagator P(L);
    const auto vs = P.apply_many(vec(rho0), taus);
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(vs.size());
    for (size_t i = 0; i < vs.size(); ++i) {
        Eigen::MatrixXcd rho = unvec(vs[i], n);
        const double drift = std::abs(rho.trace().real() - rho0.trace().real()) +
                             std::abs(rho.trace().imag());
        if (drift > 1e-6)
            throw PropagationUnstable("trace drifted by " + std::to_string(drift) + " at tau=" +
                                      std::to_string(taus[i]));
        out.push_back(std::move(rho));
    }
    return out;
}

}  // namespace qd
