#include "qdsim/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdsim/bloch.hpp"
#include "qdsim/constants.hpp"
#include "qdsim/errors.hpp"

namespace qd {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_analytic_name(const std::string& name) {
    const auto& names = analytic_param_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_rate_like(const std::string& name) {
    static const std::vector<std::string> rates = {"omega2",      "omega3",  "gamma_xx",
                                                   "gamma_x",     "gamma_relax", "G_b",
                                                   "c_charge",    "c_discharge", "Omega_R",
                                                   "Omega_L"};
    return std::find(rates.begin(), rates.end(), name) != rates.end();
}

std::pair<double, double> default_bounds(const std::string& name) {
    if (name == "A_V") return {0.0, 10.0};
    if (name == "T_D") return {1e-3, 1e6};
    if (name == "theta_B") return {0.0, kPi / 2.0};
    if (name == "delta2") return {0.0, 1e4};
    if (is_rate_like(name)) return {0.0, 1e6};
    return {-1e6, 1e6};
}

std::map<std::string, double> analytic_defaults() {
    return {{"A_V", 1.0},
            {"T_D", 8.0},
            {"theta_B", 0.0},
            {"delta2", PhysicalConstants::hbar * 2.0 * kPi / 2.39}};
}

struct Workspace {
    std::vector<std::string> names;                      // free, in problem order
    std::vector<std::pair<double, double>> box;          // bounds per free name
    std::vector<double> w;                               // weights
};

void validate_problem(const FitProblem& p, Workspace& ws) {
    if (p.taus.size() != p.values.size())
        throw GridMismatch("data grid and values have different lengths");
    if (p.free.empty()) throw SchemaError("no free parameters");
    if (p.taus.size() < 2 * p.free.size())
        throw DomainError("need at least 2x more data points than free parameters");
    for (const auto& name : p.free) {
        const bool known = is_analytic_name(name) || is_param_field(name);
        if (!known) throw SchemaError("unknown fit parameter '" + name + "'");
        if (std::count(p.free.begin(), p.free.end(), name) != 1)
            throw SchemaError("duplicate fit parameter '" + name + "'");
        auto it = p.bounds.find(name);
        auto b = it != p.bounds.end() ? it->second : default_bounds(name);
        if (!(std::isfinite(b.first) && std::isfinite(b.second) && b.first < b.second))
            throw SchemaError("bounds for '" + name + "' must be finite and ordered");
        ws.names.push_back(name);
        ws.box.push_back(b);
    }
    if (!p.weights.empty() && p.weights.size() != p.taus.size())
        throw GridMismatch("weight vector length differs from data");
    ws.w = p.weights.empty() ? std::vector<double>(p.taus.size(), 1.0) : p.weights;
    for (double wi : ws.w)
        if (!(wi >= 0.0) || !std::isfinite(wi)) throw DomainError("weights must be finite and >= 0");
}

std::map<std::string, double> assemble(const FitProblem& p, const Workspace& ws,
                                       const Eigen::VectorXd& x) {
    std::map<std::string, double> vals = analytic_defaults();
    for (const auto& kv : p.fixed) vals[kv.first] = kv.second;
    for (size_t j = 0; j < ws.names.size(); ++j) vals[ws.names[j]] = x(static_cast<int>(j));
    return vals;
}

std::vector<double> model_curve(const FitProblem& p, const std::map<std::string, double>& vals) {
    std::vector<double> out(p.taus.size());
    if (p.model == FitModel::dcp_damped) {
        const double d2 = vals.at("delta2");
        const double th = vals.at("theta_B");
        const double av = vals.at("A_V");
        const double td = vals.at("T_D");
        for (size_t i = 0; i < p.taus.size(); ++i)
            out[i] = dcp_damped(p.taus[i], d2, th, av, td);
        return out;
    }
    PhysicalParams phys = p.base;
    for (const auto& kv : vals) {
        if (const ParamField* f = find_param_field(kv.first)) phys.*(f->member) = kv.second;
    }
    const LevelModel m = build_level_model(phys, p.variant);
    return g2_pair(m, p.first, p.second, p.taus).values;
}

Eigen::VectorXd residuals(const FitProblem& p, const Workspace& ws, const Eigen::VectorXd& x) {
    const auto curve = model_curve(p, assemble(p, ws, x));
    Eigen::VectorXd r(static_cast<int>(curve.size()));
    for (size_t i = 0; i < curve.size(); ++i)
        r(static_cast<int>(i)) = std::sqrt(ws.w[i]) * (curve[i] - p.values[i]);
    return r;
}

// Central differences with steps shrunk to respect the box; falls back to a
// one-sided difference at an active bound. A column that underflows to an
// exact zero (a bound sitting on a stationary point of the model, e.g. the
// mixing angle at zero) is re-probed with widening fractions of the box so
// the iteration can escape; a truly inert parameter stays zero at any step.
Eigen::MatrixXd jacobian(const FitProblem& p, const Workspace& ws, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(ws.names.size());
    const int m = static_cast<int>(p.taus.size());
    Eigen::MatrixXd J(m, n);
    for (int j = 0; j < n; ++j) {
        auto secant = [&](double h) {
            const double up = std::min(x(j) + h, ws.box[j].second);
            const double dn = std::max(x(j) - h, ws.box[j].first);
            if (up - dn <= 0.0)
                throw SingularJacobian("bounds pin parameter '" + ws.names[j] + "'");
            Eigen::VectorXd xp = x, xm = x;
            xp(j) = up;
            xm(j) = dn;
            return Eigen::VectorXd((residuals(p, ws, xp) - residuals(p, ws, xm)) / (up - dn));
        };
        Eigen::VectorXd col = secant(1e-6 * std::max(std::abs(x(j)), 1e-4));
        const double width = ws.box[j].second - ws.box[j].first;
        for (double frac : {1e-4, 1e-2, 1e-1}) {
            if (!col.isZero(0.0)) break;
            col = secant(frac * width);
        }
        J.col(j) = col;
    }
    return J;
}

Eigen::VectorXd clamp_to_box(const Workspace& ws, Eigen::VectorXd x) {
    for (int j = 0; j < x.size(); ++j)
        x(j) = std::min(std::max(x(j), ws.box[j].first), ws.box[j].second);
    return x;
}

}  // namespace

std::vector<double> eval_model(const FitProblem& problem,
                               const std::map<std::string, double>& values) {
    Workspace ws;
    validate_problem(problem, ws);
    std::map<std::string, double> vals = analytic_defaults();
    for (const auto& kv : problem.fixed) vals[kv.first] = kv.second;
    for (const auto& kv : values) vals[kv.first] = kv.second;
    return model_curve(problem, vals);
}

FitResult fit(const FitProblem& problem, const std::map<std::string, double>& init,
              const FitTolerances& tol) {
    Workspace ws;
    validate_problem(problem, ws);

    const int n = static_cast<int>(ws.names.size());
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) {
        auto it = init.find(ws.names[j]);
        if (it == init.end()) throw SchemaError("missing initial value for '" + ws.names[j] + "'");
        x(j) = it->second;
    }
    x = clamp_to_box(ws, x);

    Eigen::VectorXd r = residuals(problem, ws, x);
    double ssr = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd J;
    double gnorm = std::numeric_limits<double>::infinity();

    for (; iter < tol.max_iter; ++iter) {
        J = jacobian(problem, ws, x);
        const Eigen::MatrixXd A = J.transpose() * J;
        // At the starting point a vanishing column means the parameter cannot
        // be fit at all, even when the gradient happens to vanish with it.
        if (iter == 0)
            for (int j = 0; j < n; ++j)
                if (!(A(j, j) > 0.0) || !std::isfinite(A(j, j)))
                    throw SingularJacobian("parameter '" + ws.names[j] +
                                           "' has no influence on the model");
        const Eigen::VectorXd g = J.transpose() * r;
        gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol.gtol) {
            converged = true;
            break;
        }
        for (int j = 0; j < n; ++j)
            if (!(A(j, j) > 0.0) || !std::isfinite(A(j, j)))
                throw SingularJacobian("parameter '" + ws.names[j] +
                                       "' has no influence on the model");

        bool accepted = false;
        // Damping is scaled per direction but floored against the strongest
        // curvature present: a direction whose diagonal has collapsed (a bound
        // sitting on a stationary point) must not get a near-zero damping term,
        // or the solve shoots an unbounded step along it.
        const double diag_floor = 1e-6 * A.diagonal().maxCoeff();
        while (lambda <= 1e12) {
            Eigen::MatrixXd M = A;
            for (int j = 0; j < n; ++j) M(j, j) += lambda * std::max(A(j, j), diag_floor);
            const Eigen::VectorXd dx = M.ldlt().solve(-g);
            if (!dx.allFinite()) throw SingularJacobian("normal equations are singular");
            const Eigen::VectorXd raw = x + dx;
            Eigen::VectorXd xn = clamp_to_box(ws, raw);
            Eigen::VectorXd rn = residuals(problem, ws, xn);
            double ssrn = rn.squaredNorm();
            // When the raw step leaves the box, a fold back across the violated
            // bound often lands far from the wall the projection sticks to;
            // keep whichever candidate fits better.
            if (raw != xn) {
                Eigen::VectorXd xr = raw;
                for (int j = 0; j < n; ++j) {
                    if (raw(j) < ws.box[j].first) xr(j) = 2.0 * ws.box[j].first - raw(j);
                    else if (raw(j) > ws.box[j].second) xr(j) = 2.0 * ws.box[j].second - raw(j);
                }
                xr = clamp_to_box(ws, xr);
                if (xr != xn) {
                    const Eigen::VectorXd rr = residuals(problem, ws, xr);
                    const double ssrr = rr.squaredNorm();
                    if (ssrr < ssrn) {
                        xn = xr;
                        rn = rr;
                        ssrn = ssrr;
                    }
                }
            }
            if (ssrn < ssr) {
                const double rel_drop = (ssr - ssrn) / std::max(ssr, 1e-300);
                const double step = (xn - x).norm();
                x = xn;
                r = rn;
                ssr = ssrn;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (rel_drop <= tol.ftol || step <= tol.xtol * (x.norm() + tol.xtol))
                    converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            converged = true;  // no descent direction improves: stationary within damping range
            break;
        }
        if (converged) break;
    }

    if (J.size() == 0) J = jacobian(problem, ws, x);
    const Eigen::VectorXd gf = J.transpose() * r;
    gnorm = gf.lpNorm<Eigen::Infinity>();
    if (converged && gnorm > std::sqrt(tol.gtol) * std::max(1.0, ssr)) converged = gnorm <= 1e-4;

    FitResult out;
    out.n_iter = iter;
    out.converged = converged;
    out.residual_norm = std::sqrt(ssr);
    out.grad_norm = gnorm;
    for (int j = 0; j < n; ++j) out.estimates[ws.names[j]] = x(j);

    const int m = static_cast<int>(problem.taus.size());
    const double s2 = m > n ? ssr / static_cast<double>(m - n) : 0.0;
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
        out.covariance = lu.inverse() * s2;
    } else {
        out.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    }
    out.std_errors.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        out.std_errors[static_cast<size_t>(j)] =
            out.covariance.allFinite() ? std::sqrt(std::max(out.covariance(j, j), 0.0))
                                       : std::numeric_limits<double>::quiet_NaN();
    return out;
}

VisibilityEstimate visibility_estimate(const Series& dcp) {
    double delta2 = PhysicalConstants::hbar * 2.0 * kPi / 2.39;
    try {
        const SpectrumResult s = fft_spectrum(dcp, Window::hann);
        if (s.has_peak && s.peak_freq > 0.0)
            delta2 = PhysicalConstants::hbar * 2.0 * kPi * s.peak_freq * 1e-3;  // MHz -> rad/ns
    } catch (const Error&) {
        // short or non-uniform curve: fall back to the zero-field default
    }
    // The mixing angle has no data-driven seed, and a curve dominated by its
    // decay baseline hides a shallow pure-decay minimum near pi/2. Descend
    // from a short ladder of angles and keep the best converged attempt.
    VisibilityEstimate best;
    bool have = false;
    for (double th : {0.4, 0.9, 1.3}) {
        VisibilityEstimate v = visibility_estimate(dcp, th, delta2);
        if (!v.fit.converged) continue;
        if (!have || v.fit.residual_norm < best.fit.residual_norm) {
            best = v;
            have = true;
        }
    }
    return best;
}

VisibilityEstimate visibility_estimate(const Series& dcp, double theta_b_init,
                                       double delta2_init) {
    FitProblem prob;
    prob.model = FitModel::dcp_damped;
    prob.free = {"A_V", "T_D", "theta_B", "delta2"};
    for (size_t i = 0; i < dcp.taus.size(); ++i) {
        if (!std::isfinite(dcp.values[i])) continue;  // skip masked points
        prob.taus.push_back(dcp.taus[i]);
        prob.values.push_back(dcp.values[i]);
    }
    if (prob.taus.size() < 8) throw DomainError("curve too short for a visibility estimate");

    // The mixing-angle seed stays off the box edges: at exactly 0 or pi/2 the
    // one-sided finite difference underflows and the fit cannot start.
    const double span = prob.taus.back() - prob.taus.front();
    std::map<std::string, double> init = {
        {"A_V", std::clamp(std::abs(prob.values.front()), 0.1, 3.0)},
        {"T_D", std::clamp(span / 3.0, 0.5, 1e4)},
        {"theta_B", std::clamp(theta_b_init, 0.05, kPi / 2.0 - 0.05)},
        {"delta2", std::max(delta2_init, 1e-3)}};

    VisibilityEstimate v;
    try {
        v.fit = fit(prob, init);
    } catch (const Error&) {
        return v;  // no usable oscillation model: flagged zero
    }

    const double d2 = v.fit.estimates.at("delta2");
    if (!(d2 > 1e-6)) return v;
    const double tau_valley = kPi * PhysicalConstants::hbar / d2;
    const double tau_peak2 = 2.0 * kPi * PhysicalConstants::hbar / d2;
    const auto at = [&](double tau) {
        return dcp_damped(tau, d2, v.fit.estimates.at("theta_B"), v.fit.estimates.at("A_V"),
                          v.fit.estimates.at("T_D"));
    };
    const double vis = (at(tau_peak2) - at(tau_valley)) / 2.0;
    if (vis < 0.005) return v;  // theta_B near pi/2: no valley above noise
    v.value = vis;
    v.oscillation = true;
    return v;
}

}  // namespace qd
