// Acceptance checks: one PASS/FAIL line per criterion, computed from the suite reports at the
// default tolerances.
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pathcalc/cli.hpp"

using namespace pathcalc;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

RunResult run_suite(const std::string& suite, json options = json::object(), unsigned workers = 1,
                    double* seconds = nullptr) {
    json doc{{"suite", suite}, {"workers", workers}};
    if (!options.empty()) doc["suites"] = json{{suite, std::move(options)}};
    auto cfg = parse_config(doc);
    auto t0 = std::chrono::steady_clock::now();
    auto r = run(cfg, false);
    if (seconds) *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }
bool ends_with(const std::string& s, const std::string& p) {
    return s.size() >= p.size() && s.compare(s.size() - p.size(), p.size(), p) == 0;
}

// Requires at least one matching entry; every match must pass.
void require(Verdict& v, const RunResult& r, const std::function<bool(const std::string&)>& match, std::size_t min_count,
             const std::string& what) {
    std::size_t n = 0;
    double worst_gap = 0.0;
    std::string worst;
    for (const auto& e : r.report.entries) {
        if (!match(e.name)) continue;
        ++n;
        if (!e.pass) {
            v.pass = false;
            v.detail += fmt::format(" {} failed (value {:.6g}, gap {:.3g} > tol {:.3g});", e.name, e.value, e.gap, e.tolerance);
        }
        if (e.gap >= worst_gap) {
            worst_gap = e.gap;
            worst = e.name;
        }
    }
    if (n < min_count) {
        v.pass = false;
        v.detail += fmt::format(" {}: expected {} entries, found {};", what, min_count, n);
    } else {
        v.detail += fmt::format(" {}: {} entries, largest gap {:.3g};", what, n, worst_gap);
    }
}

const ReportEntry* entry(const RunResult& r, const std::string& name) { return r.report.find(name); }

Verdict c1() {
    Verdict v;
    double secs = 0.0;
    auto r = run_suite("lookback", json::object(), 1, &secs);
    require(v, r, [](const std::string& n) { return n == "lookback.mc.f(0,0,0)"; }, 1, "MC value");
    if (auto e = entry(r, "lookback.mc.f(0,0,0)"))
        v.detail += fmt::format(" estimate {:.6f} vs {:.6f};", e->value, e->reference);
    if (secs >= 60.0) v.pass = false;
    v.detail += fmt::format(" runtime {:.1f} s (limit 60 s)", secs);
    return v;
}

Verdict c2() {
    Verdict v;
    // Only the closed-form residual matters here, so the Monte Carlo parts are kept small.
    auto r = run_suite("lookback", {{"paths", 1000}, {"steps", 256}, {"ks_samples", 100}, {"martingale_paths", 200},
                                    {"path_check_paths", 200}});
    require(v, r, [](const std::string& n) { return n == "lookback.pde_residual"; }, 1, "PDE residual 50^3");
    return v;
}

Verdict c3() {
    Verdict v;
    double secs = 0.0;
    auto r = run_suite("heat-solve", json::object(), 1, &secs);
    require(v, r, [](const std::string& n) { return starts_with(n, "heat.residual."); }, 10, "heat residuals");
    if (secs >= 30.0) v.pass = false;
    v.detail += fmt::format(" runtime {:.1f} s (limit 30 s)", secs);
    return v;
}

Verdict c4() {
    Verdict v;
    auto r = run_suite("ito-verify");
    require(v, r, [](const std::string& n) { return n == "ito.halving_ratio"; }, 1, "halving ratio in [1.4, 2.6]");
    if (auto e = entry(r, "ito.halving_ratio")) v.detail += fmt::format(" ratio {:.4f}", e->value);
    return v;
}

Verdict c5() {
    Verdict v;
    auto r = run_suite("regint");
    require(v, r, [](const std::string& n) { return starts_with(n, "ibp.forward.") || starts_with(n, "ibp.backward."); }, 32,
            "IBP gaps");
    require(v, r, [](const std::string& n) { return n == "qv.brownian.mean"; }, 1, "Brownian [X]_1");
    return v;
}

Verdict c6() {
    Verdict v;
    auto r = run_suite("fejer");
    require(v, r, [](const std::string& n) { return starts_with(n, "fejer.exact."); }, 2, "exactness");
    require(v, r, [](const std::string& n) { return starts_with(n, "fejer.ratio_64_8."); }, 2, "err(64)/err(8) < 0.5");
    require(v, r, [](const std::string& n) { return n == "fejer.uniform_bound.stability"; }, 1, "uniform bound");
    return v;
}

Verdict c7() {
    Verdict v;
    auto r = run_suite("sv-converge");
    require(v, r, [](const std::string& n) { return n == "sv.gap_trend"; }, 1, "decreasing gap");
    require(v, r, [](const std::string& n) { return n == "sv.final_gap"; }, 1, "final gap <= 0.02");
    if (auto e = entry(r, "sv.final_gap")) v.detail += fmt::format(" final gap {:.4f}", e->value);
    return v;
}

Verdict c8() {
    Verdict v;
    auto r = run_suite("bsde");
    require(v, r, [](const std::string& n) { return n == "bsde.feynman_kac"; }, 1, "Feynman-Kac");
    require(v, r, [](const std::string& n) { return n == "bsde.linear_generator"; }, 1, "linear generator");
    require(v, r, [](const std::string& n) { return starts_with(n, "bsde.comparison."); }, 4, "comparison pairs");
    require(v, r, [](const std::string& n) { return n == "bsde.apriori.stability"; }, 1, "a priori stability");
    require(v, r, [](const std::string& n) { return starts_with(n, "bsde.sde_convergence.") && ends_with(n, ".trend"); }, 1,
            "SDE trend");
    require(v, r, [](const std::string& n) { return starts_with(n, "bsde.limit.") && ends_with(n, ".trend"); }, 2,
            "limit trends");
    return v;
}

// Reduced sizes keep the double runs short; the hashing does not depend on size.
json reduced(const std::string& suite) {
    if (suite == "regint") return {{"qv_paths", 20}};
    if (suite == "ito-verify") return {{"seeds", 2}, {"n_steps", 1024}, {"eps", 0.0625}};
    if (suite == "heat-solve") return {{"mc_paths", 2000}, {"gh_order", 32}, {"fd_gh_order", 32}};
    if (suite == "lookback")
        return {{"paths", 4000}, {"steps", 512}, {"ks_samples", 200}, {"ks_steps", 512}, {"martingale_paths", 300},
                {"path_check_paths", 1000}, {"pde_n", 10}};
    if (suite == "fejer") return {{"orders", {4, 8, 16, 32, 64}}};
    if (suite == "sv-converge") return {{"orders", {8, 16}}, {"samples", 2000}, {"side_orders", {8}}};
    return {{"n_paths", 2000},     {"z_paths", 5000},         {"sde_paths", 200},
            {"limit_orders", {4, 16}}, {"limit_reference", 64}, {"sde_orders", {4, 8, 16}}};
}

Verdict c9() {
    Verdict v;
    for (const auto& s : suite_names()) {
        auto a = run_suite(s, reduced(s), 1);
        auto a2 = run_suite(s, reduced(s), 1);
        auto b = run_suite(s, reduced(s), 3);
        auto ha = content_hash(a.report), ha2 = content_hash(a2.report), hb = content_hash(b.report);
        bool same = ha == ha2 && ha == hb && a.plots == b.plots;
        if (!same) v.pass = false;
        v.detail += fmt::format(" {} {}{};", s, ha, same ? "" : " MISMATCH");
    }
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "Run one criterion (1-9); all when omitted")->check(CLI::Range(0, 9));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, Verdict (*)()>> criteria{
        {"lookback value sqrt(2/pi) by Monte Carlo", c1},
        {"lookback PDE residual <= 1e-10", c2},
        {"cylindrical heat residual <= 1e-6", c3},
        {"functional Ito residual halving factor", c4},
        {"regularization IBP and Brownian covariation", c5},
        {"Fejer exactness, rate and uniform bound", c6},
        {"strong-viscosity convergence for sup", c7},
        {"BSDE suite", c8},
        {"reproducible content hash at 1 and 3 workers", c9},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string(" exception: ") + e.what()};
        }
        all = all && v.pass;
        fmt::print("{} C{} {}:{}\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
