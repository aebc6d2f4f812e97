#include <cmath>

#include "pathcalc/approx.hpp"
#include "pathcalc/errors.hpp"
#include "pathcalc/rng.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

namespace {

PathFunctional named_functional(const std::string& label, double T) {
    try {
        return make_functional(label, T);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

// E[W^{t,eta}_T] as a path on eta's grid: the shifted history, then the frozen present value.
SampledPath mean_window(const SampledPath& eta, double t, double T) {
    const auto& g = eta.grid();
    std::vector<double> v(g.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = g.point(i);
        v[i] = x <= t - T ? eta.past_value(x + T - t) : eta.present_value();
    }
    return SampledPath(g, v);
}

} // namespace

SuiteOutput suite_sv(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    const double T = 1.0;
    const auto grid_points = o.at("grid_points").get<std::size_t>();
    const auto samples = o.at("samples").get<std::size_t>();
    const double k_se = o.at("k_se").get<double>();
    Grid grid = past_grid(T, grid_points);

    // Lookback functional from the zero path; the reference is the closed form.
    SvOptions opt;
    opt.T = T;
    opt.grid_points = grid_points;
    opt.samples = samples;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    opt.reference = Expectation{std::sqrt(2.0 / M_PI), 0.0};
    opt.final_tolerance = o.at("final_tolerance").get<double>();
    auto schedule = diagonal_schedule(list<std::size_t>(o, "orders"));
    if (schedule.empty()) throw ConfigError("sv-converge: orders must not be empty");
    auto zero = fixture("constant:0", grid);
    auto table = sv_convergence(named_functional("sup", T), 0.0, zero, schedule, opt);
    out.report.append(table.report);
    Csv csv({"n", "eps", "k", "value", "standard_error", "reference", "gap"});
    for (const auto& r : table.rows)
        csv.row(r.level.n, r.level.eps, r.level.k, r.value, r.standard_error, r.reference, r.gap);
    out.plots["sv_convergence.csv"] = csv.str();
    out.report.meta.notes.push_back("sv-converge: diagonal schedule k = n^2, eps = 1/n");

    // Side functionals at t = 0.3 on a smooth history.
    const double t = 0.3;
    const auto side_name = o.at("side_path").get<std::string>();
    auto eta = fixture(side_name, grid);
    auto mean = mean_window(eta, t, T);
    Csv side({"functional", "n", "eps", "value", "standard_error", "oracle"});
    for (auto n : list<std::size_t>(o, "side_orders")) {
        const auto L = diagonal_schedule({n}).front();
        auto q = Quadrature::monte_carlo(samples, stream_key(ctx.seed, n, 0x73696465));

        // The integral survives T_n: e_i integrates to zero for i >= 1 and the mollified endpoint
        // cancels between the e_0 coefficient and Lambda. G_n is linear, so its expectation is
        // the integral of the mean window.
        auto a = build_Gnek(named_functional("integral", T), L.n, L.eps, L.k, T, grid_points, q);
        auto v = sv_value(a, t, eta);
        double integral = 0.0;
        const auto& mv = mean.values();
        const double h = grid.spacing();
        for (std::size_t i = 0; i + 1 < mv.size(); ++i) integral += 0.5 * h * (mv[i] + mv[i + 1]);
        const double oracle = integral;
        side.row("integral", n, L.eps, v.value, v.standard_error, oracle);
        out.report.add(check_close("sv.integral.n=" + std::to_string(n), v.value, oracle,
                                   k_se * v.standard_error + 1e-9, "linear-mean-window", ctx.seed));

        // Present value: reported only, the endpoint behaviour of T_n is not asserted.
        auto p = build_Gnek(named_functional("present", T), L.n, L.eps, L.k, T, grid_points, q);
        auto pv = sv_value(p, t, eta);
        side.row("present", n, L.eps, pv.value, pv.standard_error, eta.present_value());
        out.report.add(note_value("sv.present.n=" + std::to_string(n), pv.value, eta.present_value(),
                                  "present-value", ctx.seed));
    }
    out.plots["sv_side.csv"] = side.str();
    return out;
}

} // namespace pathcalc::cli
