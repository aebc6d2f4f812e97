#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/simflow.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

namespace {

ItoFunctional resolve(const std::string& label) {
    try {
        if (label == "present" || label == "present-squared") return ito_functional(label);
        return ito_numerical(make_functional(label));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

// Every other node of a uniformly timed trajectory.
Trajectory coarsen(const Trajectory& fine) {
    std::vector<double> t, v;
    for (std::size_t k = 0; k < fine.size(); k += 2) {
        t.push_back(fine.times()[k]);
        v.push_back(fine.values()[k]);
    }
    return Trajectory(std::move(t), std::move(v));
}

} // namespace

SuiteOutput suite_ito(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    auto u = resolve(o.at("functional").get<std::string>());
    const auto seeds = o.at("seeds").get<std::size_t>();
    const auto n = o.at("n_steps").get<std::size_t>();
    const double eps = o.at("eps").get<double>();
    Grid grid = past_grid(1.0, o.at("window_points").get<std::size_t>());

    // The halved level runs on the same Brownian path at twice the resolution.
    SimConfig cfg;
    cfg.n_steps = 2 * n;
    cfg.T = 1.0;
    cfg.seed = ctx.seed;
    std::vector<double> base(seeds), half(seeds);
    std::vector<std::size_t> bad(seeds, 0);
    std::vector<ItoResidual> first(1);
    parallel_for(seeds, ctx.workers, [&](std::size_t s) {
        auto fine = simulate_bm_path(cfg, s);
        auto rb = ito_verify(u, coarsen(fine), eps, grid);
        auto rh = ito_verify(u, fine, eps / 2.0, grid);
        base[s] = rb.sup_residual;
        half[s] = rh.sup_residual;
        bad[s] = rb.nonconverged + rh.nonconverged;
        if (s == 0) first[0] = std::move(rb);
    });

    Csv sup({"seed", "n_steps", "eps", "sup_residual"});
    for (std::size_t s = 0; s < seeds; ++s) {
        sup.row(s, n, eps, base[s]);
        sup.row(s, 2 * n, eps / 2.0, half[s]);
    }
    out.plots["ito_sup_residual.csv"] = sup.str();
    if (seeds > 0) {
        const auto& r = first[0];
        Csv path({"t", "lhs", "drift", "horizontal", "forward", "qv", "residual"});
        for (std::size_t k = 0; k < r.times.size(); ++k)
            path.row(r.times[k], r.lhs[k], r.drift_term[k], r.horizontal_term[k], r.forward_term[k], r.qv_term[k],
                     r.residual[k]);
        out.plots["ito_residual_seed0.csv"] = path.str();
    }

    const double mb = sample_stats(base).mean, mh = sample_stats(half).mean;
    const double lo = o.at("ratio_low").get<double>(), hi = o.at("ratio_high").get<double>();
    std::size_t nonconv = 0;
    for (auto b : bad) nonconv += b;
    out.report.add(note_value("ito.sup_residual.base", mb, 0.0, "functional-ito", ctx.seed));
    out.report.add(note_value("ito.sup_residual.halved", mh, 0.0, "functional-ito", ctx.seed));
    out.report.add(check_close("ito.halving_ratio", mh > 0.0 ? mb / mh : 0.0, 0.5 * (lo + hi), 0.5 * (hi - lo),
                               "halving-ratio", ctx.seed));
    out.report.add(note_value("ito.nonconverged_limits", static_cast<double>(nonconv), 0.0, "functional-ito", ctx.seed));
    return out;
}

} // namespace pathcalc::cli
