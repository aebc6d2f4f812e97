#include <cstdio>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pathcalc/cli.hpp"
#include "pathcalc/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pathcalc: functional Ito calculus verification suites"};
    app.set_version_flag("--version", std::string(pathcalc::kVersion));
    std::optional<std::string> suite, config, out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_scale;
    std::optional<unsigned> workers;
    app.add_option("--suite", suite, "regint, ito-verify, heat-solve, lookback, fejer, sv-converge, bsde or all");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--config", config, "JSON configuration file");
    app.add_option("--out", out, "Output directory");
    app.add_option("--tol-scale", tol_scale, "Multiplier applied to every tolerance");
    app.add_option("--workers", workers, "Worker threads (results do not depend on it)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    pathcalc::RunConfig cfg;
    try {
        // Flags override the file.
        cfg = config ? pathcalc::load_config_file(*config) : pathcalc::parse_config(nlohmann::json::object());
        if (suite) cfg.suite = *suite;
        if (seed) cfg.seed = *seed;
        if (out) cfg.out_dir = *out;
        if (tol_scale) cfg.tol_scale = *tol_scale;
        if (workers) cfg.workers = *workers;
    } catch (const pathcalc::ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return 2;
    }

    auto res = pathcalc::run(cfg);
    if (!res.message.empty()) fmt::print(stderr, "{}", res.message);
    std::size_t failed = 0;
    for (const auto& e : res.report.entries)
        if (!e.pass) {
            ++failed;
            fmt::print("FAIL {}: value {:.6g}, reference {:.6g}, gap {:.3g} > tolerance {:.3g}\n", e.name, e.value,
                       e.reference, e.gap, e.tolerance);
        }
    if (res.exit_code != 2)
        fmt::print("{} entries, {} failed; report written to {}/report.json\n", res.report.entries.size(), failed,
                   cfg.out_dir);
    return res.exit_code;
}
