#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pathcalc/funcder.hpp"
#include "pathcalc/paths.hpp"
#include "pathcalc/ppde.hpp"
#include "pathcalc/report.hpp"

namespace pathcalc {

/// Orthonormal trigonometric basis of L^2([-T, 0]): e_0 = 1/sqrt(T),
/// e_{2j-1} = sqrt(2/T) sin(2 pi j x / T), e_{2j} = sqrt(2/T) cos(2 pi j x / T).
struct TrigBasis {
    double T = 1.0;

    explicit TrigBasis(double horizon = 1.0);
    double e(std::size_t i, double x) const;
    double de(std::size_t i, double x) const;
    /// int_{-T}^x e_i.
    double anti(std::size_t i, double x) const;
    /// (1/T) int_{-T}^0 x e_i(x) dx, so that (Lambda eta)_i = (eta(0) - eta(-T)) a_i.
    double moment(std::size_t i) const;
};

/// Cesaro weights (n + 1 - i) / (n + 1) over e_0 ... e_n.
struct FejerOperator {
    std::size_t n = 0;
    TrigBasis basis;

    FejerOperator(std::size_t order, double T = 1.0);
    double weight(std::size_t i) const;
};

/// Endpoint mollifier of width eps: phi_eps(x) = rho((x + T) / eps) / eps on [-T, -T + eps), with
/// rho(u) = c exp(1 / (u^2 - 1)) on [0, 1) and c normalizing rho to unit mass.
class Mollifier {
public:
    Mollifier(double eps, double T = 1.0);

    double eps() const { return eps_; }
    double T() const { return T_; }
    static double normalization(); // c

    double phi(double x) const;
    double dphi(double x) const;
    /// int_{-T}^x phi_eps.
    double anti(double x) const;

private:
    double eps_;
    double T_;
};

/// (Lambda eta)(x) = (eta(0) - eta(-T)) x / T.
SampledPath lambda_op(const SampledPath& eta);

/// Coefficients eta_i - (Lambda eta)_i for i = 0..n.
struct FourierCoeffs {
    Eigen::VectorXd stieltjes; // from the integral of (e~_i(0) - e~_i(x)) against d^- eta
    Eigen::VectorXd l2;        // from direct quadrature of eta e_i
    double x_minus1 = 0.0;     // (eta(0) - eta(-T)) / T, the slope of Lambda eta
};
FourierCoeffs fourier_coeffs(const SampledPath& eta, std::size_t n);

/// T_n eta on eta's grid, from the Stieltjes coefficients.
SampledPath fejer_apply(const FejerOperator& op, const SampledPath& eta);
/// sigma_n (eta - Lambda eta) on eta's grid.
SampledPath cesaro_residual(const FejerOperator& op, const SampledPath& eta);

/// eta(-T) + int (1 - phi~_eps) d^- eta, which equals int eta phi_eps dx.
double endpoint_functional(const Mollifier& m, const SampledPath& eta);
/// The same value by direct quadrature of eta phi_eps.
double endpoint_functional_l2(const Mollifier& m, const SampledPath& eta);

/// The approximations G_{n,eps,k} of a terminal functional. G_{n,eps} is cylindrical with basis
/// psi_{-1}, psi_0, ..., psi_n and outer g_n(y) = G(sum_i w_i y_i e_i + y_{-1} x); the smoothing
/// convolves g_n with N(0, I / k^2).
struct SvApproximant {
    std::size_t n = 0;
    double eps = 0.0;
    double k = 0.0;
    CylindricalFunctional cyl;  // value only: g_n carries no gradient or Hessian
    double smoothing = 0.0;     // 1 / k^2
    Quadrature quad;            // Monte Carlo rule for the smoothed outer function
    PathFunctional functional;  // G_{n,eps,k} at t = T
};

/// Throws InvalidArgument if G has no growth certificate. The outer function evaluates G on the
/// uniform grid of [-T, 0] with grid_points nodes.
SvApproximant build_Gnek(const PathFunctional& G, std::size_t n, double eps, double k, double T = 1.0,
                         std::size_t grid_points = 1025, const Quadrature& quad = Quadrature::monte_carlo(20000, 0));

/// U_{n,eps,k}(t, eta) = E[G_{n,eps,k}(W^{t,eta}_T)] as a cylindrical classical solution.
Expectation sv_value(const SvApproximant& a, double t, const SampledPath& eta);

struct SvLevel {
    std::size_t n = 0;
    double eps = 0.0;
    double k = 0.0;
};
/// k = n^2, eps = 1/n.
std::vector<SvLevel> diagonal_schedule(const std::vector<std::size_t>& orders);

struct SvRow {
    SvLevel level;
    double value = 0.0;
    double standard_error = 0.0;
    double reference = 0.0;
    double gap = 0.0;
};

struct SvOptions {
    double T = 1.0;
    std::size_t grid_points = 1025;
    std::size_t samples = 20000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    /// Reference value and its standard error; when absent, mc_price with ref_paths paths.
    std::optional<Expectation> reference;
    std::size_t ref_paths = 20000;
    double final_tolerance = 0.02;
};

struct SvTable {
    std::vector<SvRow> rows;
    Expectation reference;
    VerificationReport report;
};

/// Tabulates U_{n,eps,k}(t, eta) against the reference; entries record the decreasing trend of
/// the gap and the final gap against final_tolerance.
SvTable sv_convergence(const PathFunctional& G, double t, const SampledPath& eta,
                       const std::vector<SvLevel>& schedule, const SvOptions& opt = {});

} // namespace pathcalc
