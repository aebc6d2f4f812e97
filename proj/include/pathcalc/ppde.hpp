#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "pathcalc/funcder.hpp"
#include "pathcalc/paths.hpp"
#include "pathcalc/report.hpp"
#include "pathcalc/simflow.hpp"

namespace pathcalc {

/// Gaussian quadrature choice for expectations over N(x, Sigma).
struct Quadrature {
    enum class Kind { gauss_hermite, monte_carlo };
    Kind kind = Kind::gauss_hermite;
    int order = 32;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 0;

    static Quadrature gauss_hermite(int order) { return {Kind::gauss_hermite, order, 0, 0}; }
    static Quadrature monte_carlo(std::size_t n, std::uint64_t seed) { return {Kind::monte_carlo, 0, n, seed}; }
};

/// Psi(t, x) = E[g(x + N(0, Sigma(t)))], Sigma_ij(t) = int_t^T phi_i phi_j ds (+ smoothing I).
class GaussianCylModel {
public:
    explicit GaussianCylModel(CylindricalFunctional c, double simpson_tol = 1e-10);

    const CylindricalFunctional& functional() const { return c_; }
    std::size_t dim() const { return c_.dim(); }
    double T() const { return c_.T; }

    Eigen::MatrixXd covariance(double t) const;
    /// Adds variance * I to every covariance: convolution of g with N(0, variance I).
    void set_smoothing(double variance) { smoothing_ = variance; }
    double smoothing() const { return smoothing_; }

private:
    CylindricalFunctional c_;
    double tol_;
    double smoothing_ = 0.0;
};

/// F with F F' = S from a pivoted LDL' factorization; columns with zero pivots are dropped.
/// Throws NumericalDegeneracy if S is indefinite beyond a relative tolerance.
Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& S);

struct Expectation {
    double value = 0.0;
    double standard_error = 0.0;
};

struct PsiDerivatives {
    double dt = 0.0;
    Eigen::VectorXd dx;
    Eigen::MatrixXd dxx;
};

Expectation psi_eval(const GaussianCylModel& model, double t, const Eigen::VectorXd& x, const Quadrature& quad);
/// dx = E[grad g], dxx = E[hess g], dt = -1/2 phi(t)' dxx phi(t).
PsiDerivatives psi_derivatives(const GaussianCylModel& model, double t, const Eigen::VectorXd& x,
                               const Quadrature& quad);

double classical_solution(const CylindricalFunctional& c, double t, const SampledPath& eta,
                          const Quadrature& quad = Quadrature::gauss_hermite(32));
Expectation classical_solution(const GaussianCylModel& model, double t, const SampledPath& eta,
                               const Quadrature& quad);

/// The three terms of the path-dependent heat equation from their closed forms.
struct HeatTerms {
    double dt = 0.0;  // time derivative of U
    double dh = 0.0;  // horizontal derivative
    double dv = 0.0;  // first vertical derivative
    double dvv = 0.0; // second vertical derivative
    double residual() const { return dt + dh + 0.5 * dvv; }
};
HeatTerms heat_terms(const GaussianCylModel& model, double t, const SampledPath& eta, const Quadrature& quad);
double heat_residual(const CylindricalFunctional& c, double t, const SampledPath& eta,
                     const Quadrature& quad = Quadrature::gauss_hermite(64));

/// The classical solution with its closed-form derivatives, for the Ito verifier.
ItoFunctional classical_ito_functional(const CylindricalFunctional& c, const Quadrature& quad);

struct LookbackState {
    double t = 0.0;
    double m = 0.0; // running maximum
    double x = 0.0; // current value
};

/// E[max(m, x + S_{T-t})], S the running maximum of a Brownian motion.
double lookback_value(const LookbackState& s, double T);

struct LookbackDerivatives {
    double dt = 0.0;
    double dx = 0.0;
    double dxx = 0.0;
    double dm = 0.0;
};
/// Closed forms on x <= m, t < T.
LookbackDerivatives lookback_derivatives(const LookbackState& s, double T);

/// f(t, max of eta over [-t, 0], eta(0)).
double lookback_U(double t, const SampledPath& eta, double T);

/// Max of |f_t + f_xx / 2| over an n^3 grid of [0, t_max] x {m in [-1,1], x in [m-2, m]}.
ReportEntry lookback_pde_check(double T = 1.0, std::size_t n = 50, double t_max = 0.99, double tolerance = 1e-10);
/// Finite-difference checks of f_t, f_x, f_xx, f_m at a state.
std::vector<ReportEntry> lookback_fd_check(const LookbackState& s, double T, double tolerance = 1e-6);

/// Mean and standard error of G over windows W^{t,eta}_T on the grid [-T, 0] with n_steps cells.
Expectation mc_price(const PathFunctional& G, double t, const SampledPath& eta, const SimConfig& cfg);

/// Kolmogorov-Smirnov distance between sampled running maxima S_t and the law 2 Phi(z / sqrt t) - 1.
struct KsResult {
    double statistic = 0.0;
    double critical = 0.0; // 5% level
};
KsResult reflection_density_check(double t, std::size_t n_samples, std::size_t n_steps, std::uint64_t seed);

double normal_cdf(double x);
double normal_pdf(double x);

} // namespace pathcalc
