#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "qdsim/correlator.hpp"
#include "qdsim/levelmodel.hpp"
#include "qdsim/params.hpp"
#include "qdsim/polarization.hpp"

namespace qd {

enum class FitModel {
    dcp_damped,  // analytic damped-precession DCP: A_V e^{-tau/T_D} ideal(theta_B, delta2)
    g2_numeric,  // full solver ordered-pair g2 on the physical parameter set
};

// Analytic-model parameter names accepted alongside PhysicalParams fields.
inline const std::vector<std::string>& analytic_param_names() {
    static const std::vector<std::string> names = {"A_V", "T_D", "theta_B", "delta2"};
    return names;
}

struct FitProblem {
    FitModel model = FitModel::dcp_damped;
    std::vector<std::string> free;                       // parameter names to vary
    std::map<std::string, std::pair<double, double>>
        bounds;                                          // optional per-name [lo, hi]
    std::vector<double> taus;                            // ns
    std::vector<double> values;                          // observed curve
    std::vector<double> weights;                         // optional, empty = uniform

    // Fixed values for analytic-model parameters not being varied.
    std::map<std::string, double> fixed;

    // Context for g2_numeric: base parameter set and model wiring.
    PhysicalParams base;
    Variant variant = Variant::resonant;
    Pol first = Pol::R;
    Pol second = Pol::R;
};

struct FitTolerances {
    double ftol = 1e-12;  // relative objective decrease
    double xtol = 1e-12;  // relative step size
    double gtol = 1e-10;  // weighted gradient infinity norm
    int max_iter = 200;
};

struct FitResult {
    std::map<std::string, double> estimates;
    Eigen::MatrixXd covariance;   // ordered like FitProblem::free
    std::vector<double> std_errors;
    double residual_norm = 0.0;   // sqrt(sum of weighted squared residuals)
    double grad_norm = 0.0;       // final weighted gradient infinity norm
    int n_iter = 0;
    bool converged = false;
};

// Damped Gauss-Newton (Levenberg-Marquardt with diagonal scaling) on the
// weighted squared residuals. Jacobians by bounds-respecting central
// differences. Deterministic. Throws SingularJacobian when a free parameter
// has no influence on the model; a run that exhausts max_iter returns the
// best iterate with converged=false.
FitResult fit(const FitProblem& problem, const std::map<std::string, double>& init,
              const FitTolerances& tol = FitTolerances{});

// Model curve for a parameter assignment, on the problem's grid.
std::vector<double> eval_model(const FitProblem& problem,
                               const std::map<std::string, double>& values);

struct VisibilityEstimate {
    double value = 0.0;       // (model at second peak - model at first valley)/2
    bool oscillation = false; // false: no valley above noise, value forced to 0
    FitResult fit;            // the underlying damped-model fit
};

// Visibility of a DCP curve, read off the fitted analytic model rather than
// raw samples. Self-seeds the precession frequency from the curve's spectrum.
VisibilityEstimate visibility_estimate(const Series& dcp);
// Seeded variant for field sweeps where theta_B and delta2 are known roughly.
VisibilityEstimate visibility_estimate(const Series& dcp, double theta_b_init,
                                       double delta2_init);

}  // namespace qd
