#include <cmath>
#include <fstream>
#include <sstream>

#include "pathcalc/cli.hpp"
#include "pathcalc/errors.hpp"

namespace pathcalc {

using nlohmann::json;

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"regint", "ito-verify", "heat-solve", "lookback",
                                                "fejer",  "sv-converge", "bsde"};
    return names;
}

json suite_defaults(const std::string& suite) {
    if (suite == "regint")
        return {{"grid_points", 1025},
                {"fixtures", {"constant:1", "linear:1", "kinked", "zigzag"}},
                {"eps0", 0.0625},
                {"levels", 6},
                {"tolerance", 1e-3},
                {"qv_paths", 100},
                {"qv_points", 4097},
                {"qv_eps", 0.00390625},
                {"qv_eps_fine", 0.001953125},
                {"qv_tolerance", 0.05}};
    if (suite == "ito-verify")
        return {{"functional", "present-squared"},
                {"seeds", 20},
                {"n_steps", 4096},
                {"eps", 0.015625},
                {"window_points", 257},
                {"ratio_low", 1.4},
                {"ratio_high", 2.6}};
    if (suite == "heat-solve")
        return {{"fixtures", json::array()},
                {"times", {0.0, 0.3, 0.7}},
                {"paths", {"sine", "brownian:1"}},
                {"grid_points", 513},
                {"gh_order", 64},
                {"tolerance", 1e-6},
                {"fd_tolerance", 1e-5},
                {"fd_step", 1e-3},
                {"fd_gh_order", 128},
                {"mc_fixture", "cyl3"},
                {"mc_paths", 20000},
                {"mc_steps", 512},
                {"k_se", 4.0}};
    if (suite == "lookback")
        return {{"paths", 100000},
                {"steps", 4096},
                {"k_se", 4.0},
                {"bias_allowance", 0.01},
                {"pde_n", 50},
                {"pde_t_max", 0.99},
                {"pde_tolerance", 1e-10},
                {"fd_tolerance", 1e-6},
                {"ks_samples", 1000},
                {"ks_steps", 4096},
                {"martingale_paths", 2000},
                {"martingale_steps", 256},
                {"path_check_paths", 20000},
                {"surface_n", 21}};
    if (suite == "fejer")
        return {{"grid_points", 1025},
                {"fixtures", {"constant:2", "linear:0.7", "quadratic", "sine", "gauss-cdf", "kinked", "zigzag",
                              "brownian:1", "brownian:2"}},
                {"orders", {4, 8, 16, 32, 64, 128}},
                {"exact_tolerance", 1e-12},
                {"ratio_limit", 0.5},
                {"bound_tolerance", 0.05},
                {"coeff_tolerance", 1e-6},
                {"linearity_tolerance", 1e-10},
                {"eps_sweep", {0.2, 0.1, 0.05, 0.025, 0.0125}}};
    if (suite == "sv-converge")
        return {{"orders", {8, 16, 32, 64}},
                {"samples", 20000},
                {"grid_points", 1025},
                {"final_tolerance", 0.02},
                {"k_se", 4.0},
                {"side_orders", {8, 32}},
                {"side_path", "sine"}};
    if (suite == "bsde")
        return {{"n_paths", 10000},
                {"n_steps", 50},
                {"T", 1.0},
                {"degree", 4},
                {"fk_tolerance", 1e-12},
                {"linear_rate", 0.1},
                {"linear_tolerance", 0.01},
                {"z_paths", 100000},
                {"z_tolerance", 0.02},
                {"k_se", 4.0},
                {"delta", 0.1},
                {"shift", 0.2},
                {"k_rate", 0.3},
                {"apriori_factor", 2.0},
                {"sde_orders", {4, 8, 16, 32, 64}},
                {"sde_paths", 1000},
                {"limit_orders", {4, 16, 64}},
                {"limit_reference", 256},
                {"scenarios", json::array()}};
    throw ConfigError("unknown suite '" + suite + "'");
}

namespace {

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
    return a.type() == b.type();
}

json merge_suite(const std::string& suite, const json& user) {
    json merged = suite_defaults(suite);
    if (!user.is_object()) throw ConfigError("options of suite '" + suite + "' must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!merged.contains(it.key())) throw ConfigError("unknown option '" + it.key() + "' for suite '" + suite + "'");
        if (!same_kind(merged[it.key()], it.value()))
            throw ConfigError("option '" + suite + "." + it.key() + "' has the wrong type");
        merged[it.key()] = it.value();
    }
    return merged;
}

} // namespace

json suite_options(const RunConfig& cfg, const std::string& suite) {
    return cfg.suites.contains(suite) ? merge_suite(suite, cfg.suites.at(suite)) : suite_defaults(suite);
}

void validate(const RunConfig& cfg) {
    if (cfg.suite != "all") {
        bool known = false;
        for (const auto& s : suite_names()) known = known || s == cfg.suite;
        if (!known) throw ConfigError("unknown suite '" + cfg.suite + "'");
    }
    if (!(cfg.tol_scale >= 0.0) || !std::isfinite(cfg.tol_scale)) throw ConfigError("tol_scale must be finite and nonnegative");
    if (cfg.out_dir.empty()) throw ConfigError("output directory must not be empty");
    for (const auto& s : suite_names())
        if (cfg.suites.contains(s)) merge_suite(s, cfg.suites.at(s));
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be an object");
    RunConfig cfg;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const auto& k = it.key();
            if (k == "suite") cfg.suite = it->get<std::string>();
            else if (k == "seed") cfg.seed = it->get<std::uint64_t>();
            else if (k == "out") cfg.out_dir = it->get<std::string>();
            else if (k == "tol_scale") cfg.tol_scale = it->get<double>();
            else if (k == "workers") cfg.workers = it->get<unsigned>();
            else if (k == "suites") {
                if (!it->is_object()) throw ConfigError("'suites' must be an object");
                for (auto s = it->begin(); s != it->end(); ++s) cfg.suites[s.key()] = merge_suite(s.key(), s.value());
            } else {
                throw ConfigError("unknown configuration key '" + k + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    for (const auto& s : suite_names())
        if (!cfg.suites.contains(s)) cfg.suites[s] = suite_defaults(s);
    validate(cfg);
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("configuration file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

std::string config_hash(const RunConfig& cfg) {
    json body{{"suite", cfg.suite}, {"seed", cfg.seed}, {"tol_scale", cfg.tol_scale}, {"version", kVersion}};
    json suites = json::object();
    for (const auto& s : suite_names())
        suites[s] = suite_options(cfg, s);
    body["suites"] = suites;
    return fnv1a_hex(body.dump());
}

} // namespace pathcalc
