#include <algorithm>
#include <cmath>

#include "pathcalc/ppde.hpp"
#include "pathcalc/rng.hpp"
#include "pathcalc/simflow.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

SuiteOutput suite_lookback(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    const double T = 1.0, k_se = o.at("k_se").get<double>(), bias = o.at("bias_allowance").get<double>();
    const auto steps = o.at("steps").get<std::size_t>();
    const PathFunctional sup = make_functional("sup", T);
    Grid grid = past_grid(T, steps + 1);

    SimConfig cfg;
    cfg.n_steps = steps;
    cfg.n_paths = o.at("paths").get<std::size_t>();
    cfg.T = T;
    cfg.seed = ctx.seed;
    cfg.workers = ctx.workers;
    auto zero = sample_path(grid, [](double) { return 0.0; });
    auto mc = mc_price(sup, 0.0, zero, cfg);
    const double exact = lookback_value({0.0, 0.0, 0.0}, T);
    out.report.add(check_close("lookback.mc.f(0,0,0)", mc.value, exact, k_se * mc.standard_error + bias,
                               "closed-form+discrete-monitoring-allowance", ctx.seed));
    out.report.add(note_value("lookback.mc.standard_error", mc.standard_error, 0.0, "monte-carlo", ctx.seed));
    out.report.add(check_close("lookback.f(0,0,0).closed_form", exact, std::sqrt(2.0 / M_PI), 1e-15, "formula"));

    out.report.add(lookback_pde_check(T, o.at("pde_n").get<std::size_t>(), o.at("pde_t_max").get<double>(),
                                      o.at("pde_tolerance").get<double>()));
    for (auto& e : lookback_fd_check({0.5, 1.0, 0.0}, T, o.at("fd_tolerance").get<double>())) out.report.add(e);

    // Both branches meet at x = m.
    double branch = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.9})
        for (double m : {-1.0, 0.0, 0.7})
            branch = std::max(branch, std::abs(lookback_value({t, m, m}, T) - (m + std::sqrt(2.0 * (T - t) / M_PI))));
    out.report.add(check_at_most("lookback.branch_continuity", branch, 0.0, 1e-12, "formula"));
    out.report.add(check_close("lookback.dm_at_diagonal", lookback_derivatives({0.5, 0.3, 0.3}, T).dm, 0.0, 1e-15,
                               "formula"));

    auto sine = fixture("sine", grid);
    double sup_eta = *std::max_element(sine.values().begin(), sine.values().end());
    sup_eta = std::max(sup_eta, sine.present_value());
    out.report.add(check_close("lookback.U.terminal", lookback_U(T, sine, T), sup_eta, 0.0, "terminal-condition"));
    out.report.add(check_close("lookback.U.half_time_zero_path", lookback_U(T / 2, zero, T), std::sqrt(T / M_PI), 1e-15,
                               "formula"));
    SimConfig side = cfg;
    side.n_paths = o.at("path_check_paths").get<std::size_t>();
    side.seed = ctx.seed + 1;
    auto mc_side = mc_price(sup, 0.5, sine, side);
    out.report.add(check_close("lookback.U.mc(t=0.5,sine)", mc_side.value, lookback_U(0.5, sine, T),
                               k_se * mc_side.standard_error + bias, "closed-form+discrete-monitoring-allowance",
                               side.seed));

    auto ks = reflection_density_check(T, o.at("ks_samples").get<std::size_t>(), o.at("ks_steps").get<std::size_t>(),
                                       ctx.seed + 2);
    out.report.add(check_at_most("lookback.reflection_ks", ks.statistic, 0.0, ks.critical, "kolmogorov-smirnov-5%",
                                 ctx.seed + 2));

    // s -> f(s, S_s, W_s) along simulated paths. The running maximum between grid nodes is drawn
    // exactly from the Brownian bridge, so the process is a martingale at every resolution.
    SimConfig mcfg;
    mcfg.n_steps = o.at("martingale_steps").get<std::size_t>();
    mcfg.n_paths = o.at("martingale_paths").get<std::size_t>();
    mcfg.T = T;
    mcfg.seed = ctx.seed + 3;
    mcfg.workers = ctx.workers;
    auto bm = simulate_bm(mcfg);
    Eigen::MatrixXd vals(static_cast<Eigen::Index>(mcfg.n_paths), static_cast<Eigen::Index>(mcfg.n_steps + 1));
    for (std::size_t p = 0; p < bm.size(); ++p) {
        NormalStream rng(mcfg.seed, p, 0x6272696467);
        const auto& w_path = bm[p].values();
        const double dt = T / static_cast<double>(mcfg.n_steps);
        double m = 0.0;
        for (std::size_t k = 0; k <= mcfg.n_steps; ++k) {
            double w = w_path[k];
            if (k > 0) {
                double a = w_path[k - 1], d = w - a;
                double bridge_max = 0.5 * (a + w + std::sqrt(d * d - 2.0 * dt * std::log(1.0 - rng.uniform())));
                m = std::max(m, bridge_max);
            }
            vals(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = lookback_value({bm[p].times()[k], m, w}, T);
        }
    }
    auto mart = martingale_check(vals, k_se, "lookback.martingale");
    mart.seed = mcfg.seed;
    out.report.add(mart);

    const auto n = o.at("surface_n").get<std::size_t>();
    Csv surf({"t", "m", "x", "f"});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                double d = static_cast<double>(n - 1);
                double t = 0.99 * static_cast<double>(i) / d, m = -1.0 + 2.0 * static_cast<double>(j) / d;
                double x = m - 2.0 + 3.0 * static_cast<double>(k) / d; // includes the x > m branch
                surf.row(t, m, x, lookback_value({t, m, x}, T));
            }
    out.plots["lookback_surface.csv"] = surf.str();
    return out;
}

} // namespace pathcalc::cli
