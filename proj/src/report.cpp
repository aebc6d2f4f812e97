#include "pathcalc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace pathcalc {

namespace {

ReportEntry make(std::string name, double value, double reference, double gap, double tolerance,
                 std::string oracle, std::uint64_t seed) {
    ReportEntry e;
    e.name = std::move(name);
    e.value = value;
    e.reference = reference;
    e.gap = gap;
    e.tolerance = tolerance;
    e.pass = std::isfinite(gap) && gap <= tolerance;
    e.oracle = std::move(oracle);
    e.seed = seed;
    return e;
}

// JSON has no infinities; store them as null and restore on read.
nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
    return nullptr;
}

double num_from(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

ReportEntry check_close(std::string name, double value, double reference, double tolerance,
                        std::string oracle, std::uint64_t seed) {
    return make(std::move(name), value, reference, std::abs(value - reference), tolerance,
                std::move(oracle), seed);
}

ReportEntry check_at_least(std::string name, double value, double bound, double slack,
                           std::string oracle, std::uint64_t seed) {
    double gap = std::isnan(value) ? value : std::max(0.0, bound - value);
    return make(std::move(name), value, bound, gap, slack, std::move(oracle), seed);
}

ReportEntry check_at_most(std::string name, double value, double bound, double slack,
                          std::string oracle, std::uint64_t seed) {
    double gap = std::isnan(value) ? value : std::max(0.0, value - bound);
    return make(std::move(name), value, bound, gap, slack, std::move(oracle), seed);
}

ReportEntry note_value(std::string name, double value, double reference, std::string oracle,
                       std::uint64_t seed) {
    auto e = make(std::move(name), value, reference, std::abs(value - reference),
                  std::numeric_limits<double>::infinity(), std::move(oracle), seed);
    e.pass = true;
    return e;
}

void VerificationReport::append(const VerificationReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    meta.notes.insert(meta.notes.end(), other.meta.notes.begin(), other.meta.notes.end());
}

bool VerificationReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
}

const ReportEntry* VerificationReport::find(std::string_view name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

nlohmann::json to_json(const ReportEntry& e) {
    return nlohmann::json{{"name", e.name},         {"value", num(e.value)},
                          {"reference", num(e.reference)}, {"gap", num(e.gap)},
                          {"tolerance", num(e.tolerance)}, {"pass", e.pass},
                          {"oracle", e.oracle},     {"seed", e.seed}};
}

ReportEntry entry_from_json(const nlohmann::json& j) {
    ReportEntry e;
    e.name = j.at("name").get<std::string>();
    e.value = num_from(j.at("value"));
    e.reference = num_from(j.at("reference"));
    e.gap = num_from(j.at("gap"));
    e.tolerance = num_from(j.at("tolerance"));
    e.pass = j.at("pass").get<bool>();
    e.oracle = j.at("oracle").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    return e;
}

nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries) entries.push_back(to_json(e));
    return nlohmann::json{{"metadata",
                           {{"version", r.meta.version},
                            {"timestamp", r.meta.timestamp},
                            {"config_hash", r.meta.config_hash},
                            {"content_hash", content_hash(r)},
                            {"notes", r.meta.notes}}},
                          {"entries", entries}};
}

VerificationReport report_from_json(const nlohmann::json& j) {
    VerificationReport r;
    const auto& m = j.at("metadata");
    r.meta.version = m.at("version").get<std::string>();
    r.meta.timestamp = m.at("timestamp").get<std::string>();
    r.meta.config_hash = m.at("config_hash").get<std::string>();
    r.meta.notes = m.at("notes").get<std::vector<std::string>>();
    for (const auto& e : j.at("entries")) r.entries.push_back(entry_from_json(e));
    return r;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string content_hash(const VerificationReport& r) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries) entries.push_back(to_json(e));
    nlohmann::json body{{"config_hash", r.meta.config_hash},
                        {"version", r.meta.version},
                        {"notes", r.meta.notes},
                        {"entries", entries}};
    return fnv1a_hex(body.dump());
}

TrendFit monotone_trend(std::span<const double> x, std::span<const double> v, double max_rise, double floor) {
    if (x.size() != v.size() || v.size() < 2) throw std::invalid_argument("monotone_trend: need two matching points");
    TrendFit fit;
    if (*std::max_element(v.begin(), v.end()) <= floor) {
        fit.flat = fit.decreasing = true;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(std::max(v[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    fit.log_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    bool steps = true;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] * (1.0 + max_rise) && v[i] > floor) steps = false;
    fit.decreasing = fit.log_slope < 0.0 && v.back() < v.front() && steps;
    return fit;
}

ReportEntry trend_entry(std::string name, const TrendFit& fit, std::uint64_t seed) {
    return check_close(std::move(name), fit.decreasing ? 1.0 : 0.0, 1.0, 0.0,
                       fit.flat ? "monotone-trend(flat)" : "monotone-trend", seed);
}

} // namespace pathcalc
