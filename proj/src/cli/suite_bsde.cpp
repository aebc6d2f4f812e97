#include <algorithm>
#include <cmath>

#include "pathcalc/bsde.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/errors.hpp"
#include "suites.hpp"

namespace pathcalc::cli {

namespace {

using V = Eigen::VectorXd;
using M = Eigen::MatrixXd;

SDECoeffs registry_coeffs(const std::string& name) {
    SDECoeffs c;
    c.d = 1;
    c.label = name;
    if (name == "bm") {
        c.b = [](double, const V& x) { return V::Zero(x.size()); };
        c.sigma = [](double, const V&) { return M::Identity(1, 1); };
        c.lipschitz_C = 1.0;
    } else if (name == "ou") {
        c.b = [](double, const V& x) { return V(-0.5 * x); };
        c.sigma = [](double, const V&) { return M::Constant(1, 1, 0.8); };
        c.lipschitz_C = 0.8;
    } else if (name == "abs-drift") {
        c.b = [](double, const V& x) { return V(x.cwiseAbs()); };
        c.sigma = [](double, const V&) { return M::Identity(1, 1); };
        c.lipschitz_C = 1.0;
    } else if (name == "gbm") {
        c.b = [](double, const V& x) { return V(0.05 * x); };
        c.sigma = [](double, const V& x) { return M::Constant(1, 1, 0.2 * x(0)); };
        c.lipschitz_C = 0.25;
    } else if (name == "zero") {
        c.b = [](double, const V& x) { return V::Zero(x.size()); };
        c.sigma = [](double, const V&) { return M::Zero(1, 1); };
        c.lipschitz_C = 0.0;
    } else {
        throw ConfigError("unknown coefficients '" + name + "'");
    }
    return c;
}

double param(const std::string& desc, double fallback) {
    auto p = desc.find(':');
    if (p == std::string::npos) return fallback;
    try {
        return std::stod(desc.substr(p + 1));
    } catch (const std::exception&) {
        throw ConfigError("bad parameter in '" + desc + "'");
    }
}

std::string head(const std::string& desc) { return desc.substr(0, desc.find(':')); }

std::pair<Terminal, GrowthBound> registry_terminal(const std::string& desc) {
    const auto h = head(desc);
    if (h == "tanh") {
        double a = param(desc, 1.0);
        return {[a](const V& x) { return std::tanh(a * x(0)); }, {1.0, 0.0}};
    }
    if (h == "sin") return {[](const V& x) { return std::sin(x(0)); }, {1.0, 0.0}};
    if (h == "abs") return {[](const V& x) { return std::abs(x(0)); }, {1.0, 1.0}};
    if (h == "identity") return {[](const V& x) { return x(0); }, {1.0, 1.0}};
    if (h == "square") return {[](const V& x) { return x(0) * x(0); }, {1.0, 2.0}};
    if (h == "one") return {[](const V&) { return 1.0; }, {1.0, 0.0}};
    if (h == "zero") return {[](const V&) { return 0.0; }, {0.0, 0.0}};
    throw ConfigError("unknown terminal '" + desc + "'");
}

std::pair<Generator, double> registry_generator(const std::string& desc) {
    const auto h = head(desc);
    if (h == "zero") return {[](double, const V&, double, const V&) { return 0.0; }, 0.0};
    if (h == "linear") {
        double r = param(desc, 0.1);
        return {[r](double, const V&, double y, const V&) { return -r * y; }, std::abs(r)};
    }
    if (h == "const") {
        double c = param(desc, 0.0);
        return {[c](double, const V&, double, const V&) { return c; }, 0.0};
    }
    throw ConfigError("unknown generator '" + desc + "'");
}

BSDEProblem problem(const std::string& coeffs, const std::string& terminal, const std::string& generator) {
    BSDEProblem p;
    p.coeffs = registry_coeffs(coeffs);
    std::tie(p.g, p.g_growth) = registry_terminal(terminal);
    std::tie(p.f, p.f_lipschitz) = registry_generator(generator);
    p.label = coeffs + "/" + terminal + "/" + generator;
    return p;
}

Flavor parse_flavor(const std::string& s) {
    if (s == "exact") return Flavor::exact;
    if (s == "super") return Flavor::super;
    if (s == "sub") return Flavor::sub;
    throw ConfigError("unknown flavor '" + s + "'");
}

} // namespace

SuiteOutput suite_bsde(const SuiteContext& ctx) {
    const auto& o = ctx.opt;
    SuiteOutput out;
    SimConfig cfg;
    cfg.n_paths = o.at("n_paths").get<std::size_t>();
    cfg.n_steps = o.at("n_steps").get<std::size_t>();
    cfg.T = o.at("T").get<double>();
    cfg.seed = ctx.seed;
    cfg.workers = ctx.workers;
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const int degree = o.at("degree").get<int>();
    const double k_se = o.at("k_se").get<double>();
    const double T = cfg.T;
    const V x0 = V::Zero(1);
    auto warn = [&](const BSDESolution& s, const std::string& what) {
        for (const auto& w : s.warnings) out.report.meta.notes.push_back("bsde " + what + ": " + w);
    };

    // Zero generator: Y_0 is the sample mean of g(X_T) on the same paths.
    {
        auto p = problem("bm", "tanh:2", "zero");
        auto s = bsde_solve(p, Flavor::exact, 0.0, x0, cfg, degree);
        warn(s, "feynman-kac");
        const auto& XT = s.X.back();
        std::vector<double> g(static_cast<std::size_t>(XT.rows()));
        for (Eigen::Index i = 0; i < XT.rows(); ++i) g[static_cast<std::size_t>(i)] = p.g(XT.row(i).transpose());
        out.report.add(check_close("bsde.feynman_kac", s.y0, sample_stats(g).mean, o.at("fk_tolerance").get<double>(),
                                   "sample-mean", ctx.seed));
    }

    // Linear generator -r y with g = 1: Y_t = exp(-r (T - t)).
    {
        const double r = o.at("linear_rate").get<double>();
        auto p = problem("bm", "one", "linear:" + std::to_string(r));
        auto s = bsde_solve(p, Flavor::exact, 0.0, x0, cfg, degree);
        warn(s, "linear");
        const double exact = std::exp(-r * T);
        out.report.add(check_close("bsde.linear_generator", s.y0 / exact, 1.0, o.at("linear_tolerance").get<double>(),
                                   "exponential-discount", ctx.seed));
    }

    // g(x) = x on Brownian motion has Z = 1.
    {
        SimConfig big = cfg;
        big.n_paths = o.at("z_paths").get<std::size_t>();
        auto s = bsde_solve(problem("bm", "identity", "zero"), Flavor::exact, 0.0, x0, big, std::min(degree, 2));
        warn(s, "z-oracle");
        double sum = 0.0;
        const auto& Z = s.Z[0];
        const Eigen::Index steps = Z.cols() - 1;
        for (Eigen::Index k = 0; k < steps; ++k) sum += (Z.col(k).array() - 1.0).square().mean();
        out.report.add(check_at_most("bsde.z_oracle.rms", std::sqrt(sum / static_cast<double>(steps)), 0.0,
                                     o.at("z_tolerance").get<double>(), "unit-z", ctx.seed));
    }

    // Comparison on sub/super pairs.
    {
        std::vector<SamplePoint> pts{{0.0, V::Constant(1, 0.0)}, {0.0, V::Constant(1, 1.0)},
                                     {0.5, V::Constant(1, -1.0)}, {0.5, V::Constant(1, 1.0)}};
        const double delta = o.at("delta").get<double>(), shift = o.at("shift").get<double>();
        const double kr = o.at("k_rate").get<double>();
        auto base = problem("ou", "tanh:2", "linear:0.1");
        auto shifted = [&](double dg, double df) {
            auto p = base;
            auto g = base.g;
            auto f = base.f;
            p.g = [g, dg](const V& x) { return g(x) + dg; };
            p.f = [f, df](double t, const V& x, double y, const V& z) { return f(t, x, y, z) + df; };
            return p;
        };
        struct Pair {
            std::string name;
            BSDEProblem sub, super;
            Flavor fs, fp;
        };
        auto with_k = base;
        with_k.k_rate = [kr](double, const V&) { return kr; };
        std::vector<Pair> pairs{{"terminal_delta", shifted(-delta, 0.0), shifted(delta, 0.0), Flavor::exact, Flavor::exact},
                                {"terminal_equal", base, base, Flavor::exact, Flavor::exact},
                                {"generator_shift", shifted(0.0, -shift), base, Flavor::exact, Flavor::exact},
                                {"sub_super", with_k, with_k, Flavor::sub, Flavor::super}};
        for (const auto& pr : pairs) {
            auto e = comparison_check(bsde_value_map(pr.sub, pr.fs, cfg, degree), bsde_value_map(pr.super, pr.fp, cfg, degree),
                                      pts, "bsde.comparison." + pr.name, k_se);
            e.seed = ctx.seed;
            out.report.add(e);
        }
    }

    // A priori estimate: implied constants across five terminals.
    {
        std::vector<double> constants;
        Csv csv({"scenario", "lhs", "rhs", "constant"});
        for (const std::string g : {"tanh:0.5", "tanh:1", "tanh:2", "tanh:4", "sin"}) {
            auto p = problem("bm", g, "zero");
            auto s = bsde_solve(p, Flavor::exact, 0.0, x0, cfg, degree);
            warn(s, "apriori " + g);
            auto r = apriori_check(s, p);
            csv.row(g, r.lhs, r.rhs, r.constant);
            constants.push_back(r.constant);
            out.report.add(note_value("bsde.apriori.constant." + g, r.constant, 0.0, "implied-constant", ctx.seed));
        }
        auto e = apriori_stability(constants, o.at("apriori_factor").get<double>(), "bsde.apriori.stability");
        e.seed = ctx.seed;
        out.report.add(e);
        out.plots["bsde_apriori.csv"] = csv.str();
    }

    // Mollified SDE convergence.
    const auto sde_orders = list<std::size_t>(o, "sde_orders");
    SimConfig sc = cfg;
    sc.n_paths = o.at("sde_paths").get<std::size_t>();
    Csv conv({"table", "n", "error"});
    {
        auto tab = sde_convergence(registry_coeffs("abs-drift"), 0.0, x0, sde_orders, sc);
        for (auto& e : tab.report.entries) e.name = "bsde." + e.name;
        out.report.append(tab.report);
        for (std::size_t j = 0; j < tab.orders.size(); ++j) conv.row("sde.abs-drift", tab.orders[j], tab.errors[j]);

        // b = sigma = 0: X^n - X = W / n exactly, so n^2 times the error does not depend on n.
        auto z = sde_convergence(registry_coeffs("zero"), 0.0, x0, sde_orders, sc);
        double lo = INFINITY, hi = 0.0;
        for (std::size_t j = 0; j < z.orders.size(); ++j) {
            double s = z.errors[j] * static_cast<double>(z.orders[j] * z.orders[j]);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
            conv.row("sde.zero.scaled", z.orders[j], s);
        }
        out.report.add(check_close("bsde.sde_convergence.zero.scaled_spread", hi / lo, 1.0, 1e-10, "ellipticity-floor",
                                   ctx.seed));
    }

    // Limit diagnostic for a kinked terminal.
    for (double q : {1.0, 1.5}) {
        auto tab = limit_diagnostic(problem("bm", "abs", "zero"), 0.0, x0, list<std::size_t>(o, "limit_orders"),
                                    o.at("limit_reference").get<std::size_t>(), q, cfg, degree);
        for (auto& e : tab.report.entries) e.name = "bsde." + e.name;
        out.report.append(tab.report);
        for (std::size_t j = 0; j < tab.orders.size(); ++j)
            conv.row(fmt::format("limit.q={}", q), tab.orders[j], tab.errors[j]);
    }
    out.plots["bsde_convergence.csv"] = conv.str();

    for (const std::string name : {"bm", "ou", "abs-drift", "gbm"}) {
        auto e = lipschitz_spot_check(registry_coeffs(name), 1000, ctx.seed);
        e.name = "bsde." + e.name;
        out.report.add(e);
    }
    {
        auto m = mollify_coeffs(registry_coeffs("abs-drift"), 8);
        m.label = "abs-drift.mollified8";
        auto e = lipschitz_spot_check(m, 1000, ctx.seed);
        e.name = "bsde." + e.name;
        out.report.add(e);
    }

    // User scenarios.
    Csv sc_csv({"scenario", "flavor", "t", "x", "y0", "standard_error"});
    for (const auto& s : o.at("scenarios")) {
        if (!s.is_object()) throw ConfigError("bsde scenarios must be objects");
        for (auto it = s.begin(); it != s.end(); ++it)
            if (it.key() != "coeffs" && it.key() != "terminal" && it.key() != "generator" && it.key() != "flavor" &&
                it.key() != "t" && it.key() != "x" && it.key() != "k_rate")
                throw ConfigError("unknown scenario key '" + it.key() + "'");
        try {
            auto p = problem(s.value("coeffs", "bm"), s.value("terminal", "tanh:1"), s.value("generator", "zero"));
            const double kr = s.value("k_rate", 0.0);
            if (kr < 0.0) throw ConfigError("scenario k_rate must be nonnegative");
            p.k_rate = [kr](double, const V&) { return kr; };
            const auto flavor_name = s.value("flavor", "exact");
            const double t = s.value("t", 0.0), x = s.value("x", 0.0);
            auto sol = bsde_solve(p, parse_flavor(flavor_name), t, V::Constant(1, x), cfg, degree);
            warn(sol, p.label);
            sc_csv.row(p.label, flavor_name, t, x, sol.y0, sol.y0_se);
            out.report.add(note_value("bsde.scenario." + p.label + "." + flavor_name, sol.y0, 0.0, "scenario", ctx.seed));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad bsde scenario: ") + e.what());
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("bad bsde scenario: ") + e.what());
        }
    }
    out.plots["bsde_scenarios.csv"] = sc_csv.str();
    return out;
}

} // namespace pathcalc::cli
