#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

#include "pathcalc/cli.hpp"
#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "suites.hpp"

namespace pathcalc {

namespace cli {

SampledPath fixture(const std::string& desc, const Grid& grid) {
    try {
        return make_fixture(desc, grid);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

Csv::Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += "\n";
}

} // namespace cli

namespace {

using SuiteFn = cli::SuiteOutput (*)(const cli::SuiteContext&);

SuiteFn suite_fn(const std::string& name) {
    if (name == "regint") return cli::suite_regint;
    if (name == "ito-verify") return cli::suite_ito;
    if (name == "heat-solve") return cli::suite_heat;
    if (name == "lookback") return cli::suite_lookback;
    if (name == "fejer") return cli::suite_fejer;
    if (name == "sv-converge") return cli::suite_sv;
    if (name == "bsde") return cli::suite_bsde;
    throw ConfigError("unknown suite '" + name + "'");
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Slot {
    cli::SuiteOutput out;
    std::optional<std::string> config_error;
};

} // namespace

RunResult run(const RunConfig& cfg, bool write_files) {
    RunResult res;
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        res.exit_code = 2;
        res.message = e.what();
        return res;
    }
    set_default_workers(std::max(1u, cfg.workers));

    std::vector<std::string> selected;
    if (cfg.suite == "all")
        selected = suite_names();
    else
        selected.push_back(cfg.suite);

    std::vector<nlohmann::json> options;
    for (const auto& s : selected) options.push_back(suite_options(cfg, s));
    std::vector<Slot> slots(selected.size());
    // Suites are independent; each one writes only its own slot.
    parallel_for(selected.size(), cfg.workers, [&](std::size_t i) {
        cli::SuiteContext ctx{options[i], cfg.seed, std::max(1u, cfg.workers)};
        try {
            slots[i].out = suite_fn(selected[i])(ctx);
        } catch (const ConfigError& e) {
            slots[i].config_error = e.what();
        } catch (const std::exception& e) {
            slots[i].out.report.add(check_close(selected[i] + ".error", 1.0, 0.0, 0.0, e.what(), cfg.seed));
            slots[i].out.report.meta.notes.push_back(selected[i] + ": " + e.what());
        }
    });

    res.report.meta.version = kVersion;
    res.report.meta.timestamp = utc_now();
    res.report.meta.config_hash = config_hash(cfg);
    bool config_failed = false;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].config_error) {
            config_failed = true;
            res.message += selected[i] + ": " + *slots[i].config_error + "\n";
            res.report.meta.notes.push_back("configuration error in " + selected[i] + ": " + *slots[i].config_error);
        }
        res.report.append(slots[i].out.report);
        for (auto& [name, text] : slots[i].out.plots) res.plots[name] = text;
    }
    for (auto& e : res.report.entries) {
        if (std::isfinite(e.tolerance)) {
            e.tolerance *= cfg.tol_scale;
            e.pass = e.gap <= e.tolerance;
        }
    }

    res.exit_code = config_failed ? 2 : res.report.all_pass() ? 0 : 1;
    if (write_files) {
        namespace fs = std::filesystem;
        try {
            fs::create_directories(fs::path(cfg.out_dir) / "plot");
            std::ofstream(fs::path(cfg.out_dir) / "report.json") << to_json(res.report).dump(2) << "\n";
            for (const auto& [name, text] : res.plots) std::ofstream(fs::path(cfg.out_dir) / "plot" / name) << text;
        } catch (const fs::filesystem_error& e) {
            res.message += std::string("cannot write outputs: ") + e.what() + "\n";
            res.exit_code = 2;
        }
    }
    return res;
}

} // namespace pathcalc
