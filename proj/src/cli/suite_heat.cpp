#include <algorithm>
#include <cmath>

#include "pathcalc/errors.hpp"
#include "pathcalc/ppde.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

SuiteOutput suite_heat(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    const double T = 1.0;
    std::vector<CylindricalFunctional> corpus;
    auto names = list<std::string>(o, "fixtures");
    try {
        if (names.empty())
            corpus = cylindrical_corpus(T);
        else
            for (const auto& n : names) corpus.push_back(cylindrical_fixture(n, T));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    Grid grid = past_grid(T, o.at("grid_points").get<std::size_t>());
    std::vector<std::pair<std::string, SampledPath>> paths;
    for (const auto& p : list<std::string>(o, "paths")) paths.emplace_back(p, fixture(p, grid));
    const auto times = list<double>(o, "times");
    const auto gh = Quadrature::gauss_hermite(o.at("gh_order").get<int>());
    // The difference quotient amplifies quadrature error, so it gets its own, finer rule.
    const auto gh_fd = Quadrature::gauss_hermite(o.at("fd_gh_order").get<int>());
    const double tol = o.at("tolerance").get<double>(), h = o.at("fd_step").get<double>();

    Csv csv({"fixture", "t", "path", "dt", "dh", "dv", "dvv", "residual"});
    for (const auto& c : corpus) {
        GaussianCylModel model(c);
        double worst = 0.0, worst_fd = 0.0, worst_terminal = 0.0;
        for (const auto& [pn, eta] : paths) {
            for (double t : times) {
                auto h3 = heat_terms(model, t, eta, gh);
                worst = std::max(worst, std::abs(h3.residual()));
                csv.row(c.label, t, pn, h3.dt, h3.dh, h3.dv, h3.dvv, h3.residual());
                // Time derivative of Psi against a fourth-order centered difference at frozen coordinates.
                if (t - 2.0 * h >= 0.0 && t + 2.0 * h <= T) {
                    Eigen::VectorXd x = cyl_coordinates(c, t, eta);
                    auto psi = [&](double s) { return psi_eval(model, s, x, gh_fd).value; };
                    double fd = (8.0 * (psi(t + h) - psi(t - h)) - (psi(t + 2.0 * h) - psi(t - 2.0 * h))) / (12.0 * h);
                    worst_fd = std::max(worst_fd, std::abs(psi_derivatives(model, t, x, gh_fd).dt - fd));
                }
            }
            worst_terminal =
                std::max(worst_terminal, std::abs(classical_solution(c, T, eta, gh) - eval_cyl(c, T, eta)));
        }
        out.report.add(check_at_most("heat.residual." + c.label, worst, 0.0, tol, "closed-form-terms", ctx.seed));
        out.report.add(check_at_most("heat.psi_dt_fd." + c.label, worst_fd, 0.0, o.at("fd_tolerance").get<double>(),
                                     "finite-difference", ctx.seed));
        out.report.add(check_at_most("heat.terminal." + c.label, worst_terminal, 0.0, 0.0, "terminal-condition", ctx.seed));
    }
    out.plots["heat_residuals.csv"] = csv.str();

    // Monte Carlo cross-check of one classical solution through the stochastic flow.
    const auto mc_name = o.at("mc_fixture").get<std::string>();
    if (!mc_name.empty() && !paths.empty()) {
        CylindricalFunctional c;
        PathFunctional G;
        try {
            c = cylindrical_fixture(mc_name, T);
            G = make_functional("cylindrical(" + mc_name + ")", T);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        SimConfig cfg;
        cfg.n_steps = o.at("mc_steps").get<std::size_t>();
        cfg.n_paths = o.at("mc_paths").get<std::size_t>();
        cfg.T = T;
        cfg.seed = ctx.seed;
        cfg.workers = ctx.workers;
        const double t = times.empty() ? 0.0 : times[times.size() / 2];
        const auto& eta = paths.front().second;
        auto mc = mc_price(G, t, eta, cfg);
        double exact = classical_solution(c, t, eta, Quadrature::gauss_hermite(32));
        out.report.add(check_close("heat.mc_cross_check." + mc_name, mc.value, exact,
                                   o.at("k_se").get<double>() * mc.standard_error, "monte-carlo-flow", ctx.seed));
    }
    return out;
}

} // namespace pathcalc::cli
