#include <algorithm>
#include <cmath>

#include "pathcalc/approx.hpp"
#include "pathcalc/errors.hpp"
#include "pathcalc/quadrature.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

namespace {

double sup_diff(const SampledPath& a, const SampledPath& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

bool is_exact_fixture(const std::string& name) {
    return name.rfind("constant", 0) == 0 || name.rfind("linear", 0) == 0;
}

bool is_rate_fixture(const std::string& name) {
    return name.rfind("sine", 0) == 0 || name.rfind("brownian", 0) == 0;
}

// Gauss-Legendre composite rule for int_{-T}^0 f, 64 panels.
double integrate_past(const std::function<double(double)>& f, double T) {
    static const auto gl = gauss_legendre(12);
    const int panels = 64;
    const double h = T / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = -T + (p + 0.5) * h;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) s += gl.weights[q] * f(mid + 0.5 * h * gl.nodes[q]);
    }
    return 0.5 * h * s;
}

} // namespace

SuiteOutput suite_fejer(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    const double T = 1.0;
    Grid grid = past_grid(T, o.at("grid_points").get<std::size_t>());
    auto orders = list<std::size_t>(o, "orders");
    std::sort(orders.begin(), orders.end());
    if (orders.empty()) throw ConfigError("fejer: orders must not be empty");

    std::vector<std::pair<std::string, SampledPath>> corpus;
    for (const auto& name : list<std::string>(o, "fixtures")) corpus.emplace_back(name, fixture(name, grid));

    const double exact_tol = o.at("exact_tolerance").get<double>();
    Csv csv({"fixture", "n", "sup_error", "norm_ratio", "endpoint_error"});
    // M over orders up to 64 and over all orders.
    double m_low = 0.0, m_all = 0.0;
    double damping_worst = -INFINITY;
    for (const auto& [name, eta] : corpus) {
        std::vector<double> xs, errs;
        double err8 = NAN, err64 = NAN;
        const double norm = eta.sup_norm();
        SampledPath residual_base = eta;
        {
            auto lam = lambda_op(eta);
            std::vector<double> v(eta.values().size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = eta.values()[i] - lam.values()[i];
            residual_base = SampledPath(grid, v);
        }
        const double base_norm = residual_base.sup_norm();
        double worst_exact = 0.0;
        for (auto n : orders) {
            FejerOperator op(n, T);
            auto tn = fejer_apply(op, eta);
            double err = sup_diff(tn, eta);
            double ratio = norm > 0.0 ? tn.sup_norm() / norm : 1.0;
            csv.row(name, n, err, ratio, tn.values().back() - eta.values().back());
            if (n <= 64) m_low = std::max(m_low, ratio);
            m_all = std::max(m_all, ratio);
            worst_exact = std::max(worst_exact, err);
            if (n <= 64) {
                xs.push_back(static_cast<double>(n));
                errs.push_back(err);
            }
            if (n == 8) err8 = err;
            if (n == 64) {
                err64 = err;
                out.report.add(note_value("fejer.endpoint_shift." + name, tn.values().back() - eta.values().back(), 0.0,
                                          "fejer-endpoint", ctx.seed));
            }
            // Cesaro damping of the periodized residual.
            double excess = cesaro_residual(op, eta).sup_norm() - base_norm - 1e-12 * std::max(base_norm, norm);
            damping_worst = std::max(damping_worst, excess);
        }
        if (is_exact_fixture(name))
            out.report.add(check_at_most("fejer.exact." + name, worst_exact, 0.0, exact_tol, "linear-invariance", ctx.seed));
        if (is_rate_fixture(name) && std::isfinite(err8) && std::isfinite(err64)) {
            out.report.add(check_at_most("fejer.ratio_64_8." + name, err64 / err8, 0.0, o.at("ratio_limit").get<double>(),
                                         "fejer-convergence", ctx.seed));
            out.report.add(trend_entry("fejer.trend." + name, monotone_trend(xs, errs), ctx.seed));
        }
    }
    out.plots["fejer_errors.csv"] = csv.str();
    out.report.add(note_value("fejer.uniform_bound.M", m_all, 0.0, "uniform-bound", ctx.seed));
    out.report.add(check_close("fejer.uniform_bound.stability", m_all / m_low, 1.0, o.at("bound_tolerance").get<double>(),
                               "uniform-bound", ctx.seed));
    out.report.add(check_at_most("fejer.damping", std::max(damping_worst, 0.0), 0.0, 0.0, "cesaro-damping", ctx.seed));

    // Stieltjes against L^2 coefficients.
    const std::size_t n_mid = orders[orders.size() / 2];
    double coeff_gap = 0.0;
    for (const auto& [name, eta] : corpus) {
        auto c = fourier_coeffs(eta, n_mid);
        coeff_gap = std::max(coeff_gap, (c.stieltjes - c.l2).cwiseAbs().maxCoeff());
    }
    out.report.add(check_at_most("fejer.coeff_cross_check", coeff_gap, 0.0, o.at("coeff_tolerance").get<double>(),
                                 "l2-quadrature", ctx.seed));

    // Linearity on two rough fixtures.
    {
        auto eta = fixture("sine", grid), zeta = fixture("brownian:1", grid);
        const double a = 0.7, b = -1.3;
        std::vector<double> v(eta.values().size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * eta.values()[i] + b * zeta.values()[i];
        FejerOperator op(32, T);
        auto lhs = fejer_apply(op, SampledPath(grid, v));
        auto te = fejer_apply(op, eta), tz = fejer_apply(op, zeta);
        double gap = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            gap = std::max(gap, std::abs(lhs.values()[i] - a * te.values()[i] - b * tz.values()[i]));
        out.report.add(check_at_most("fejer.linearity", gap, 0.0, o.at("linearity_tolerance").get<double>(), "linearity",
                                     ctx.seed));
    }

    // Basis orthonormality and mollifier mass.
    {
        TrigBasis basis(T);
        double worst = 0.0;
        for (std::size_t i = 0; i <= 16; ++i)
            for (std::size_t j = i; j <= 16; ++j) {
                double ip = integrate_past([&](double x) { return basis.e(i, x) * basis.e(j, x); }, T);
                worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
            }
        out.report.add(check_at_most("fejer.basis_orthonormality", worst, 0.0, 1e-8, "gauss-legendre", ctx.seed));
        double mass_gap = 0.0;
        for (double eps : {1.0, 0.3, 0.05}) {
            Mollifier m(eps, T);
            double mass = adaptive_simpson([&](double x) { return m.phi(x); }, -T, -T + eps, 1e-13);
            mass_gap = std::max(mass_gap, std::abs(mass - 1.0));
        }
        out.report.add(check_at_most("fejer.mollifier_mass", mass_gap, 0.0, 1e-8, "adaptive-simpson", ctx.seed));
    }

    // Endpoint functional.
    {
        auto c = fixture("constant:2", grid);
        out.report.add(check_close("endpoint.constant", endpoint_functional(Mollifier(0.1, T), c), 2.0, exact_tol,
                                   "unit-mass", ctx.seed));
        auto lin = fixture("linear:1", grid);
        Mollifier m(0.1, T);
        double v = endpoint_functional(m, lin);
        out.report.add(check_close("endpoint.linear(eps=0.1)", v, -1.0, 0.1, "first-order-bias", ctx.seed));
        out.report.add(check_close("endpoint.linear.l2_cross_check", v, endpoint_functional_l2(m, lin), 1e-8,
                                   "l2-quadrature", ctx.seed));

        auto sine = fixture("sine", grid);
        auto eps_sweep = list<double>(o, "eps_sweep");
        std::vector<double> es, errs;
        Csv sweep({"eps", "value", "error"});
        double fit_c = 0.0;
        for (double eps : eps_sweep) {
            double val = endpoint_functional(Mollifier(eps, T), sine);
            double err = std::abs(val - sine.values().front());
            sweep.row(eps, val, err);
            es.push_back(eps);
            errs.push_back(err);
            fit_c = std::max(fit_c, err / eps);
        }
        out.plots["endpoint_sweep.csv"] = sweep.str();
        if (es.size() >= 2) {
            // Observed order: least-squares slope of log error against log eps.
            auto fit = monotone_trend(es, errs);
            double slope = fit.log_slope;
            out.report.add(check_close("endpoint.sweep_order", slope, 1.0, 0.2, "richardson-fit", ctx.seed));
            out.report.add(note_value("endpoint.sweep_constant", fit_c, 0.0, "richardson-fit", ctx.seed));
        }
    }
    return out;
}

} // namespace pathcalc::cli
