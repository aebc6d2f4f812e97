#include "pathcalc/funcder.hpp"

#include <algorithm>
#include <cmath>

#include "pathcalc/errors.hpp"

namespace pathcalc {

double PathFunctional::operator()(double t, const SampledPath& eta) const {
    if (!evaluator) throw UnsupportedFunctional("functional '" + label + "' has no evaluator");
    double v = evaluator(t, eta);
    if (!std::isfinite(v)) throw NumericalDegeneracy("functional '" + label + "' returned a non-finite value");
    return v;
}

Eigen::VectorXd CylindricalFunctional::phi(double s) const {
    Eigen::VectorXd v(dim());
    for (std::size_t i = 0; i < dim(); ++i) v(i) = basis[i].phi(s);
    return v;
}

namespace {

void check_time(const CylindricalFunctional& c, double t) {
    if (!(t >= 0.0 && t <= c.T)) throw InvalidArgument("cylindrical functional: t outside [0, T]");
}

// eta(0) phi(t) - eta(-t) phi'(0) - int_{-t}^0 eta(x) phi''(x + t) dx, with eta(0) given.
Eigen::VectorXd rates(const CylindricalFunctional& c, double t, const SampledPath& eta, double eta0) {
    check_time(c, t);
    Eigen::VectorXd r(c.dim());
    double eta_mt = eta.past_value(-t);
    for (std::size_t i = 0; i < c.dim(); ++i) {
        const auto& b = c.basis[i];
        double integral = t > 0.0 ? integrate_against(eta, [&](double x) { return b.ddphi(x + t); }, -t, 0.0) : 0.0;
        r(i) = eta0 * b.dphi(t) - eta_mt * b.dphi(0.0) - integral;
    }
    return r;
}

} // namespace

Eigen::VectorXd cyl_coordinates(const CylindricalFunctional& c, double t, const SampledPath& eta) {
    check_time(c, t);
    Eigen::VectorXd x(c.dim());
    const double a = eta.present_value();
    for (std::size_t i = 0; i < c.dim(); ++i) {
        const auto& b = c.basis[i];
        double integral = t > 0.0 ? integrate_against(eta, [&](double y) { return b.dphi(y + t); }, -t, 0.0) : 0.0;
        x(i) = a * b.phi(t) - integral;
    }
    return x;
}

Eigen::VectorXd cyl_time_rates(const CylindricalFunctional& c, double t, const SampledPath& eta) {
    return rates(c, t, eta, eta.present_value());
}

Eigen::VectorXd cyl_shift_rates(const CylindricalFunctional& c, double t, const SampledPath& eta) {
    // The shifted past approaches eta(0-) at the right end, not the present value.
    return rates(c, t, eta, eta.values().back());
}

double eval_cyl(const CylindricalFunctional& c, double t, const SampledPath& eta) {
    return c.outer.value(cyl_coordinates(c, t, eta));
}

CylClosedForm cyl_closed_form(const CylindricalFunctional& c, double t, const SampledPath& eta) {
    Eigen::VectorXd x = cyl_coordinates(c, t, eta);
    Eigen::VectorXd grad = c.outer.gradient(x);
    Eigen::MatrixXd hess = c.outer.hessian(x);
    Eigen::VectorXd p = c.phi(t);
    CylClosedForm r;
    r.value = c.outer.value(x);
    r.dh = -grad.dot(cyl_shift_rates(c, t, eta));
    r.dv = grad.dot(p);
    r.dvv = p.dot(hess * p);
    return r;
}

EpsilonSchedule default_horizontal_schedule(const Grid& grid) {
    const double dx = grid.spacing();
    double k = 32.0;
    while (k > 8.0 && k * dx > grid.length() / 4.0) k /= 2.0;
    EpsilonSchedule s;
    for (; k >= 2.0; k /= 2.0) s.eps_values.push_back(k * dx);
    return s;
}

EpsilonSchedule default_vertical_schedule(double a) {
    return EpsilonSchedule::geometric(0.05 * std::max(1.0, std::abs(a)), 5);
}

LimitEstimate horizontal_derivative(const PathFunctional& u, double t, const SampledPath& eta,
                                    const EpsilonSchedule& sched, double tolerance, HorizontalMode mode) {
    sched.validate();
    const double base = u(t, eta);
    std::vector<std::pair<double, double>> raw;
    for (double e : sched.eps_values) {
        double q = mode == HorizontalMode::left ? (base - u(t, shift_past(eta, e))) / e
                                                : (u(t, advance_past(eta, e)) - base) / e;
        raw.emplace_back(e, q);
    }
    return estimate_limit(std::move(raw), tolerance, sched.extrapolation);
}

std::pair<LimitEstimate, LimitEstimate> vertical_derivatives(const PathFunctional& u, double t,
                                                             const SampledPath& eta,
                                                             const EpsilonSchedule& h_sched, double tolerance) {
    h_sched.validate();
    auto [past, a] = split(eta);
    const double u0 = u(t, join(past, a));
    std::vector<std::pair<double, double>> d1, d2;
    for (double h : h_sched.eps_values) {
        double up = u(t, join(past, a + h)), dn = u(t, join(past, a - h));
        d1.emplace_back(h, (up - dn) / (2.0 * h));
        d2.emplace_back(h, (up - 2.0 * u0 + dn) / (h * h));
    }
    return {estimate_limit(std::move(d1), tolerance, h_sched.extrapolation),
            estimate_limit(std::move(d2), tolerance, h_sched.extrapolation)};
}

DerivativeResult derivatives(const PathFunctional& u, double t, const SampledPath& eta) {
    DerivativeResult r;
    r.dh = horizontal_derivative(u, t, eta, default_horizontal_schedule(eta.grid()));
    auto [dv, dvv] = vertical_derivatives(u, t, eta, default_vertical_schedule(eta.present_value()));
    r.dv = std::move(dv);
    r.dvv = std::move(dvv);
    return r;
}

FrechetFunctional frechet_from_cylindrical(const CylindricalFunctional& c) {
    FrechetFunctional f;
    f.T = c.T;
    f.u.label = c.label;
    f.u.evaluator = [c](double, const SampledPath& eta) { return eval_cyl(c, c.T, eta); };
    f.density = [c](const SampledPath& eta) {
        Eigen::VectorXd grad = c.outer.gradient(cyl_coordinates(c, c.T, eta));
        return sample_path(eta.grid(), [&](double x) {
            double d = 0.0;
            for (std::size_t i = 0; i < c.dim(); ++i) d -= grad(i) * c.basis[i].dphi(x + c.T);
            return d;
        });
    };
    return f;
}

ReportEntry frechet_rep_check(const FrechetFunctional& f, const SampledPath& eta, const EpsilonSchedule& sched,
                              double tolerance) {
    if (!f.density) throw UnsupportedFunctional("frechet_rep_check: no closed-form density for '" + f.u.label + "'");
    auto dh = horizontal_derivative(f.u, f.T, eta, sched);
    auto bw = backward_integral(f.density(eta), eta, sched, 1e-6, LeftExtension::constant);
    return check_close("frechet." + f.u.label, dh.value, bw.value, tolerance, "backward-integral");
}

BasisFunction basis_constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

BasisFunction basis_polynomial(std::vector<double> k) {
    auto eval = [](const std::vector<double>& c, double s) {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
        return v;
    };
    std::vector<double> d1, d2;
    for (std::size_t i = 1; i < k.size(); ++i) d1.push_back(static_cast<double>(i) * k[i]);
    for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(static_cast<double>(i) * d1[i]);
    return {[=](double s) { return eval(k, s); }, [=](double s) { return eval(d1, s); },
            [=](double s) { return eval(d2, s); }};
}

BasisFunction basis_cos(double w) {
    return {[w](double s) { return std::cos(w * s); }, [w](double s) { return -w * std::sin(w * s); },
            [w](double s) { return -w * w * std::cos(w * s); }};
}

BasisFunction basis_sin(double w) {
    return {[w](double s) { return std::sin(w * s); }, [w](double s) { return w * std::cos(w * s); },
            [w](double s) { return -w * w * std::sin(w * s); }};
}

BasisFunction basis_exp(double r) {
    return {[r](double s) { return std::exp(r * s); }, [r](double s) { return r * std::exp(r * s); },
            [r](double s) { return r * r * std::exp(r * s); }};
}

OuterFunction outer_linear(Eigen::VectorXd w) {
    const auto n = w.size();
    return {[w](const Eigen::VectorXd& x) { return w.dot(x); }, [w](const Eigen::VectorXd&) { return w; },
            [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, n).eval(); }};
}

OuterFunction outer_quadratic(Eigen::MatrixXd A, Eigen::VectorXd b) {
    Eigen::MatrixXd S = A + A.transpose();
    return {[A, b](const Eigen::VectorXd& x) { return x.dot(A * x) + b.dot(x); },
            [S, b](const Eigen::VectorXd& x) { return (S * x + b).eval(); },
            [S](const Eigen::VectorXd&) { return S; }};
}

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

CylindricalFunctional make_cyl(std::string label, double T, OuterFunction g, std::vector<BasisFunction> basis) {
    CylindricalFunctional c;
    c.label = std::move(label);
    c.T = T;
    c.outer = std::move(g);
    c.basis = std::move(basis);
    return c;
}

} // namespace

std::vector<CylindricalFunctional> cylindrical_corpus(double T) {
    std::vector<CylindricalFunctional> out;
    const double pi = M_PI;

    out.push_back(make_cyl("cyl0", T, outer_linear(vec({1.0})), {basis_constant()}));

    Eigen::MatrixXd A1 = Eigen::MatrixXd::Identity(1, 1);
    out.push_back(make_cyl("cyl1", T, outer_quadratic(A1, vec({0.0})), {basis_cos(1.0)}));
    out.push_back(make_cyl("cyl2", T, outer_quadratic(A1, vec({0.0})), {basis_polynomial({T, -1.0})}));

    out.push_back(make_cyl("cyl3", T,
                           {[](const Eigen::VectorXd& x) { return std::sin(x(0)); },
                            [](const Eigen::VectorXd& x) { return vec({std::cos(x(0))}); },
                            [](const Eigen::VectorXd& x) {
                                Eigen::MatrixXd h(1, 1);
                                h(0, 0) = -std::sin(x(0));
                                return h;
                            }},
                           {basis_exp(-1.0)}));

    Eigen::MatrixXd A4 = Eigen::MatrixXd::Zero(2, 2);
    A4(0, 1) = 1.0;
    out.push_back(make_cyl("cyl4", T, outer_quadratic(A4, vec({0.0, 0.0})), {basis_constant(), basis_cos(2.0)}));

    out.push_back(make_cyl("cyl5", T,
                           {[](const Eigen::VectorXd& x) { return std::sqrt(1.0 + x(0) * x(0)) + x(1) * x(1); },
                            [](const Eigen::VectorXd& x) {
                                return vec({x(0) / std::sqrt(1.0 + x(0) * x(0)), 2.0 * x(1)});
                            },
                            [](const Eigen::VectorXd& x) {
                                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
                                h(0, 0) = std::pow(1.0 + x(0) * x(0), -1.5);
                                h(1, 1) = 2.0;
                                return h;
                            }},
                           {basis_polynomial({T, -1.0}), basis_polynomial({0.0, 0.0, 1.0})}));

    out.push_back(make_cyl("cyl6", T,
                           {[](const Eigen::VectorXd& x) { return std::cos(x(0) - x(1)); },
                            [](const Eigen::VectorXd& x) {
                                double s = std::sin(x(0) - x(1));
                                return vec({-s, s});
                            },
                            [](const Eigen::VectorXd& x) {
                                double c = std::cos(x(0) - x(1));
                                Eigen::MatrixXd h(2, 2);
                                h << -c, c, c, -c;
                                return h;
                            }},
                           {basis_exp(-1.0), basis_sin(pi / T)}));

    out.push_back(make_cyl("cyl7", T,
                           {[](const Eigen::VectorXd& x) { return x(0) * x(0) * x(0) - x(0) * x(1) + x(2) * x(2); },
                            [](const Eigen::VectorXd& x) {
                                return vec({3.0 * x(0) * x(0) - x(1), -x(0), 2.0 * x(2)});
                            },
                            [](const Eigen::VectorXd& x) {
                                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
                                h(0, 0) = 6.0 * x(0);
                                h(0, 1) = h(1, 0) = -1.0;
                                h(2, 2) = 2.0;
                                return h;
                            }},
                           {basis_constant(), basis_polynomial({T, -1.0}), basis_cos(1.0)}));

    out.push_back(make_cyl("cyl8", T,
                           {[](const Eigen::VectorXd& x) { return std::exp(-0.5 * x.squaredNorm()); },
                            [](const Eigen::VectorXd& x) { return (-std::exp(-0.5 * x.squaredNorm()) * x).eval(); },
                            [](const Eigen::VectorXd& x) {
                                double e = std::exp(-0.5 * x.squaredNorm());
                                return (e * (x * x.transpose() - Eigen::MatrixXd::Identity(3, 3))).eval();
                            }},
                           {basis_cos(1.0), basis_exp(-0.5), basis_polynomial({0.0, 0.0, 1.0})}));

    out.push_back(make_cyl("cyl9", T,
                           {[](const Eigen::VectorXd& x) { return std::atan(x(0) + x(1)) + 0.5 * x(2); },
                            [](const Eigen::VectorXd& x) {
                                double d = 1.0 / (1.0 + (x(0) + x(1)) * (x(0) + x(1)));
                                return vec({d, d, 0.5});
                            },
                            [](const Eigen::VectorXd& x) {
                                double s = x(0) + x(1);
                                double h2 = -2.0 * s / ((1.0 + s * s) * (1.0 + s * s));
                                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
                                h(0, 0) = h(0, 1) = h(1, 0) = h(1, 1) = h2;
                                return h;
                            }},
                           {basis_sin(0.5 * pi / T), basis_constant(), basis_polynomial({T, -1.0})}));
    return out;
}

CylindricalFunctional cylindrical_fixture(std::string_view name, double T) {
    for (auto& c : cylindrical_corpus(T))
        if (c.label == name) return c;
    throw InvalidArgument("unknown cylindrical fixture '" + std::string(name) + "'");
}

PathFunctional make_functional(std::string_view label, double T) {
    PathFunctional u;
    u.label = std::string(label);
    if (label == "present") {
        u.evaluator = [](double, const SampledPath& e) { return e.present_value(); };
        u.growth = GrowthBound{1.0, 1.0};
    } else if (label == "present-squared") {
        u.evaluator = [](double, const SampledPath& e) { return e.present_value() * e.present_value(); };
        u.growth = GrowthBound{1.0, 2.0};
    } else if (label == "integral") {
        u.evaluator = [](double, const SampledPath& e) {
            const auto& v = e.values();
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < v.size(); ++k) s += 0.5 * (v[k] + v[k + 1]);
            return s * e.grid().spacing();
        };
        u.growth = GrowthBound{T, 1.0};
    } else if (label == "sup") {
        u.evaluator = [](double, const SampledPath& e) {
            return std::max(e.present_value(), *std::max_element(e.values().begin(), e.values().end()));
        };
        u.growth = GrowthBound{1.0, 1.0};
    } else if (label.starts_with("cylindrical(") && label.ends_with(")")) {
        auto c = cylindrical_fixture(label.substr(12, label.size() - 13), T);
        u.evaluator = [c](double, const SampledPath& e) { return eval_cyl(c, c.T, e); };
    } else {
        throw InvalidArgument("unknown functional '" + std::string(label) + "'");
    }
    return u;
}

} // namespace pathcalc
