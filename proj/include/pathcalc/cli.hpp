#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathcalc/report.hpp"

namespace pathcalc {

inline constexpr const char* kVersion = "0.3.0";

/// Suites runnable on their own; "all" runs every one of them.
const std::vector<std::string>& suite_names();

struct RunConfig {
    std::string suite = "all";
    std::uint64_t seed = 0;
    std::string out_dir = "pathcalc-out";
    double tol_scale = 1.0;
    unsigned workers = 1;
    /// Per-suite options, defaults merged with the user's values.
    nlohmann::json suites = nlohmann::json::object();
};

/// Default options of one suite. Throws ConfigError for unknown names.
nlohmann::json suite_defaults(const std::string& suite);

/// Effective options of one suite: defaults overridden by cfg.suites[suite].
nlohmann::json suite_options(const RunConfig& cfg, const std::string& suite);

/// Parses a configuration document. Recognized top-level keys: suite, seed, out, tol_scale,
/// workers, suites. Unknown keys, suites or suite options raise ConfigError, as do negative
/// tolerance scales and values of the wrong type.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);
/// Checks the suite name, the tolerance scale and the per-suite option types.
void validate(const RunConfig& cfg);

/// Hash of everything that determines the results: suite, seed, tolerance scale and options.
/// Worker count and output directory are excluded.
std::string config_hash(const RunConfig& cfg);

struct RunResult {
    int exit_code = 0; // 0 pass, 1 verification failure, 2 configuration error
    VerificationReport report;
    std::map<std::string, std::string> plots; // file name -> CSV text
    std::string message;
};

/// Runs the selected suites, scales tolerances and, if write_files, writes report.json and
/// plot/*.csv under out_dir even when checks fail.
RunResult run(const RunConfig& cfg, bool write_files = true);

} // namespace pathcalc
