#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pathcalc/funcder.hpp"
#include "pathcalc/ppde.hpp"
#include "pathcalc/report.hpp"
#include "pathcalc/simflow.hpp"

namespace pathcalc {

using Drift = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using Diffusion = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;
using Generator = std::function<double(double, const Eigen::VectorXd&, double, const Eigen::VectorXd&)>;
using Terminal = std::function<double(const Eigen::VectorXd&)>;
/// Rate of the scenario-supplied K: dK = k_rate(t, X_t) dt, k_rate >= 0.
using KRate = std::function<double(double, const Eigen::VectorXd&)>;

/// dX = b(t, X) dt + sigma(t, X) dW in R^d, d <= 3.
struct SDECoeffs {
    std::size_t d = 1;
    Drift b;
    Diffusion sigma;
    double lipschitz_C = 1.0;
    std::string label;

    void validate() const;
};

/// Max over random pairs in [-R, R]^d and t in [0, 1] of (|b(x)-b(x')| + |sigma(x)-sigma(x')|) / |x-x'|.
/// Euclidean norm for vectors, Frobenius for matrices.
double measured_lipschitz(const SDECoeffs& c, std::size_t pairs = 1000, std::uint64_t seed = 0, double R = 3.0);
/// measured_lipschitz and |b(t,0)| + |sigma(t,0)| both at most lipschitz_C.
ReportEntry lipschitz_spot_check(const SDECoeffs& c, std::size_t pairs = 1000, std::uint64_t seed = 0,
                                 double R = 3.0);

struct BSDEProblem {
    SDECoeffs coeffs;
    Generator f;
    double f_lipschitz = 0.0; // in (y, z)
    Terminal g;
    GrowthBound g_growth;
    KRate k_rate; // used by the super and sub flavors only
    std::string label;

    void validate() const;
};

enum class Flavor { exact, super, sub };

struct BSDESolution {
    Flavor flavor = Flavor::exact;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> X; // per time: paths x d
    Eigen::MatrixXd Y;              // paths x times
    std::vector<Eigen::MatrixXd> Z; // per component: paths x times (last column unused, zero)
    Eigen::MatrixXd K;              // paths x times, K(., t0) = 0
    double y0 = 0.0;
    double y0_se = 0.0;
    std::vector<std::string> warnings;
};

/// Euler-Maruyama paths on the uniform grid of [t, cfg.T], with the Brownian increments kept.
struct SdePaths {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> X;  // per time: paths x d
    std::vector<Eigen::MatrixXd> dW; // per step: paths x d
};

/// Throws SimulationError carrying the first offending path index when a state is not finite.
/// Increments depend only on (cfg.seed, path index), so coefficients can be compared on common
/// random numbers.
SdePaths sde_euler(const SDECoeffs& c, double t, const Eigen::VectorXd& x, const SimConfig& cfg);
/// E[sup_s |X_s|^p].
double sup_moment(const SdePaths& paths, double p);

/// Convolution with n^d rho(n x) (tensor product of the unit bump on [-1, 1], evaluated by
/// Gauss-Legendre with weights normalized to one) plus (1/n) I on sigma. The smoothed maps are
/// convex combinations of shifted copies, so they keep the Lipschitz constant.
SDECoeffs mollify_coeffs(const SDECoeffs& raw, std::size_t n);
Terminal mollify_terminal(const Terminal& g, std::size_t d, std::size_t n);
/// Smooths in x only; the generator is already Lipschitz in (y, z).
Generator mollify_generator(const Generator& f, std::size_t d, std::size_t n);
BSDEProblem mollify_problem(const BSDEProblem& p, std::size_t n);

struct ConvergenceTable {
    std::vector<std::size_t> orders;
    std::vector<double> errors;
    VerificationReport report;
};

/// E[sup_s |X^n_s - X_s|^2] for X^n driven by mollify_coeffs(raw, n) on the increments of X.
ConvergenceTable sde_convergence(const SDECoeffs& raw, double t, const Eigen::VectorXd& x,
                                 const std::vector<std::size_t>& orders, const SimConfig& cfg);

/// Backward regression scheme on Euler paths from (t, x), horizon cfg.T:
/// Z_k = E[(Y_{k+1} - E[Y_{k+1} | X_k]) dW_k / dt | X_k],
/// Y_k = E[Y_{k+1} + f(t_k, X_k, Y_{k+1}, Z_k) dt +/- k_rate(t_k, X_k) dt | X_k],
/// conditional expectations by least squares on polynomials of the standardized state.
/// A rank-deficient design lowers the degree and records a warning.
BSDESolution bsde_solve(const BSDEProblem& p, Flavor flavor, double t, const Eigen::VectorXd& x, const SimConfig& cfg,
                        int degree = 4);

/// (t, x) -> value estimate with its standard error.
using ValueMap = std::function<Expectation(double, const Eigen::VectorXd&)>;
ValueMap bsde_value_map(const BSDEProblem& p, Flavor flavor, const SimConfig& cfg, int degree = 4);

struct SamplePoint {
    double t = 0.0;
    Eigen::VectorXd x;
};

/// min over points of (super - sub) + k * sqrt(se_sub^2 + se_super^2) against 0.
ReportEntry comparison_check(const ValueMap& sub, const ValueMap& super, const std::vector<SamplePoint>& points,
                             std::string name = "comparison", double k = 4.0);

struct AprioriResult {
    double lhs = 0.0; // ||Z||^2_H2 + ||K||^2_S2
    double rhs = 0.0; // ||Y||^2_S2 + E int |f(s, X_s, 0, 0)|^2 ds
    double constant = 0.0; // lhs / ((1 + T^3) rhs), 0 when both sides vanish
};
AprioriResult apriori_check(const BSDESolution& sol, const BSDEProblem& p);
/// max / min of the implied constants against factor.
ReportEntry apriori_stability(const std::vector<double>& constants, double factor = 2.0,
                              std::string name = "apriori.stability");

/// E int |Z^n - Z^{n*}|^q dt over the orders, each problem mollified at n and solved on common
/// random numbers; n* = reference_order.
ConvergenceTable limit_diagnostic(const BSDEProblem& raw, double t, const Eigen::VectorXd& x,
                                  const std::vector<std::size_t>& orders, std::size_t reference_order, double q,
                                  const SimConfig& cfg, int degree = 4);

} // namespace pathcalc
