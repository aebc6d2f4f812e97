#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pathcalc/paths.hpp"
#include "pathcalc/regcalc.hpp"
#include "pathcalc/report.hpp"

namespace pathcalc {

/// |u(t, eta)| <= C (1 + ||eta||_inf^m)
struct GrowthBound {
    double C = 1.0;
    double m = 1.0;
};

struct PathFunctional {
    std::function<double(double, const SampledPath&)> evaluator;
    std::string label;
    std::optional<GrowthBound> growth;

    double operator()(double t, const SampledPath& eta) const;
};

/// Scalar basis function on [0, T] with two derivatives.
struct BasisFunction {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    std::function<double(double)> ddphi;
};

/// Smooth map R^N -> R with gradient and Hessian.
struct OuterFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

/// G(eta) = g(x_1, ..., x_N), x_i the integral of phi_i(x + T) against d^- eta.
struct CylindricalFunctional {
    OuterFunction outer;
    std::vector<BasisFunction> basis;
    double T = 1.0;
    std::string label;

    std::size_t dim() const { return basis.size(); }
    Eigen::VectorXd phi(double s) const;
};

/// x_i(t, eta) = eta(0) phi_i(t) - int_{-t}^0 eta(x) phi_i'(x + t) dx.
Eigen::VectorXd cyl_coordinates(const CylindricalFunctional& c, double t, const SampledPath& eta);
/// d/dt x_i(t, eta) at fixed eta.
Eigen::VectorXd cyl_time_rates(const CylindricalFunctional& c, double t, const SampledPath& eta);
/// d/d(eps) x_i(t, shift_past(eta, eps)) at eps = 0.
Eigen::VectorXd cyl_shift_rates(const CylindricalFunctional& c, double t, const SampledPath& eta);

double eval_cyl(const CylindricalFunctional& c, double t, const SampledPath& eta);

/// Closed-form derivatives of eta -> g(x(t, eta)) at frozen t.
struct CylClosedForm {
    double value = 0.0;
    double dh = 0.0;
    double dv = 0.0;
    double dvv = 0.0;
};
CylClosedForm cyl_closed_form(const CylindricalFunctional& c, double t, const SampledPath& eta);

struct DerivativeResult {
    LimitEstimate dh;
    LimitEstimate dv;
    LimitEstimate dvv;
};

/// left: [u(eta) - u(shift_past(eta, eps))] / eps. right: [u(advance_past(eta, eps)) - u(eta)] / eps,
/// a diagnostic that differs from left in general.
enum class HorizontalMode { left, right };

/// Levels 32, 16, ..., 2 grid spacings (multiples of the spacing keep shifts exact).
EpsilonSchedule default_horizontal_schedule(const Grid& grid);
/// Steps 0.05 max(1,|a|) halved four times.
EpsilonSchedule default_vertical_schedule(double a);

LimitEstimate horizontal_derivative(const PathFunctional& u, double t, const SampledPath& eta,
                                    const EpsilonSchedule& sched, double tolerance = 1e-6,
                                    HorizontalMode mode = HorizontalMode::left);

/// Central differences in the present value; h_sched holds the steps.
std::pair<LimitEstimate, LimitEstimate> vertical_derivatives(const PathFunctional& u, double t,
                                                             const SampledPath& eta,
                                                             const EpsilonSchedule& h_sched,
                                                             double tolerance = 1e-6);

DerivativeResult derivatives(const PathFunctional& u, double t, const SampledPath& eta);

/// A terminal functional with an optional closed-form density of its horizontal derivative
/// against the backward integral.
struct FrechetFunctional {
    PathFunctional u;
    double T = 1.0;
    std::function<SampledPath(const SampledPath&)> density;
};

/// u(eta) = G(eta) with density -sum_i D_i g(x) phi_i'(x + T).
FrechetFunctional frechet_from_cylindrical(const CylindricalFunctional& c);

/// Horizontal derivative at t = T against the backward integral of the density. The backward
/// quotient uses the constant left extension, matching shift_past.
ReportEntry frechet_rep_check(const FrechetFunctional& f, const SampledPath& eta,
                              const EpsilonSchedule& sched, double tolerance = 1e-4);

/// Basis and outer building blocks.
BasisFunction basis_constant(double c = 1.0);
BasisFunction basis_polynomial(std::vector<double> coeffs); // sum c_k s^k
BasisFunction basis_cos(double omega);
BasisFunction basis_sin(double omega);
BasisFunction basis_exp(double rate);
OuterFunction outer_linear(Eigen::VectorXd w);
OuterFunction outer_quadratic(Eigen::MatrixXd A, Eigen::VectorXd b); // x'Ax + b'x

/// Corpus of ten cylindrical functionals with N <= 3 (names cyl0 ... cyl9).
std::vector<CylindricalFunctional> cylindrical_corpus(double T = 1.0);
CylindricalFunctional cylindrical_fixture(std::string_view name, double T = 1.0);

/// Registry: present, present-squared, integral, sup, cylindrical(<name>).
PathFunctional make_functional(std::string_view label, double T = 1.0);

} // namespace pathcalc
