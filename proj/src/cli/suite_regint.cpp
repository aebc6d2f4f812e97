#include <cmath>

#include "pathcalc/parallel.hpp"
#include "pathcalc/regcalc.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

SuiteOutput suite_regint(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    Grid grid = past_grid(1.0, o.at("grid_points").get<std::size_t>());
    auto sched = EpsilonSchedule::geometric(o.at("eps0").get<double>(), o.at("levels").get<std::size_t>());
    sched.validate_for(grid);
    const double tol = o.at("tolerance").get<double>();

    std::vector<std::pair<std::string, SampledPath>> corpus;
    for (const auto& name : list<std::string>(o, "fixtures")) corpus.emplace_back(name, fixture(name, grid));

    Csv ibp({"direction", "g", "f", "eps", "approximant", "stieltjes"});
    for (auto dir : {IbpDirection::forward, IbpDirection::backward}) {
        const std::string d = dir == IbpDirection::forward ? "forward" : "backward";
        for (const auto& [gn, g] : corpus) {
            for (const auto& [fn, f] : corpus) {
                auto r = ibp_evaluate(g, f, dir, sched, tol);
                for (const auto& [eps, v] : r.limit.raw) ibp.row(d, gn, fn, eps, v, r.stieltjes);
                // Richardson limit from the two finest levels against the Stieltjes side.
                out.report.add(check_close("ibp." + d + "." + gn + "|" + fn, r.limit.value, r.stieltjes, tol,
                                           "stieltjes", ctx.seed));
                // Raw gaps over the last three levels must shrink.
                const auto L = r.level_gaps.size();
                if (L >= 3) {
                    std::vector<double> xs, gs;
                    for (std::size_t j = L - 3; j < L; ++j) {
                        xs.push_back(1.0 / r.limit.raw[j].first);
                        gs.push_back(r.level_gaps[j]);
                    }
                    out.report.add(trend_entry("ibp_trend." + d + "." + gn + "|" + fn,
                                               monotone_trend(xs, gs, 0.0, 1e-12), ctx.seed));
                }
            }
        }
    }
    out.plots["regint_ibp.csv"] = ibp.str();

    // Quadratic variation of Brownian samples on [0, 1].
    const auto n_paths = o.at("qv_paths").get<std::size_t>();
    const double eps = o.at("qv_eps").get<double>(), fine = o.at("qv_eps_fine").get<double>();
    Grid qgrid(0.0, 1.0, o.at("qv_points").get<std::size_t>());
    std::vector<double> coarse_v(n_paths), fine_v(n_paths);
    parallel_for(n_paths, ctx.workers, [&](std::size_t i) {
        auto X = brownian_path(qgrid, ctx.seed, i);
        coarse_v[i] = covariation_approximant(X, X, 1.0, eps);
        fine_v[i] = covariation_approximant(X, X, 1.0, fine);
    });
    Csv qv({"path", "eps", "qv"});
    std::vector<double> dev_c(n_paths), dev_f(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        qv.row(i, eps, coarse_v[i]);
        qv.row(i, fine, fine_v[i]);
        dev_c[i] = std::abs(coarse_v[i] - 1.0);
        dev_f[i] = std::abs(fine_v[i] - 1.0);
    }
    out.plots["regint_qv.csv"] = qv.str();
    auto mc = sample_stats(coarse_v);
    out.report.add(check_close("qv.brownian.mean", mc.mean, 1.0, o.at("qv_tolerance").get<double>(), "brownian-qv",
                               ctx.seed));
    out.report.add(note_value("qv.brownian.mean_abs_dev", sample_stats(dev_c).mean, 0.0, "brownian-qv", ctx.seed));
    out.report.add(note_value("qv.brownian.mean_abs_dev.fine", sample_stats(dev_f).mean, 0.0, "brownian-qv", ctx.seed));
    return out;
}

} // namespace pathcalc::cli
