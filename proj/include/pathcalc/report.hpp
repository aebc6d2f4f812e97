#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pathcalc {

/// One named check. pass is always gap <= tolerance.
struct ReportEntry {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string oracle;
    std::uint64_t seed = 0;
};

/// |value - reference| <= tolerance.
ReportEntry check_close(std::string name, double value, double reference, double tolerance,
                        std::string oracle, std::uint64_t seed = 0);
/// value >= bound - slack; gap is the shortfall below bound.
ReportEntry check_at_least(std::string name, double value, double bound, double slack,
                           std::string oracle, std::uint64_t seed = 0);
/// value <= bound + slack; gap is the excess above bound.
ReportEntry check_at_most(std::string name, double value, double bound, double slack,
                          std::string oracle, std::uint64_t seed = 0);
/// A recorded measurement with no pass/fail meaning (infinite tolerance).
ReportEntry note_value(std::string name, double value, double reference, std::string oracle,
                       std::uint64_t seed = 0);

struct ReportMetadata {
    std::string version;
    std::string timestamp;
    std::string config_hash;
    std::vector<std::string> notes;
};

struct VerificationReport {
    ReportMetadata meta;
    std::vector<ReportEntry> entries;

    void add(ReportEntry e) { entries.push_back(std::move(e)); }
    void append(const VerificationReport& other);
    bool all_pass() const;
    const ReportEntry* find(std::string_view name) const;
};

nlohmann::json to_json(const ReportEntry& e);
ReportEntry entry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VerificationReport& r);
VerificationReport report_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);
/// Hash of config hash, notes and entries; excludes the timestamp.
std::string content_hash(const VerificationReport& r);

/// Decreasing-trend diagnostic over a table (x_j, v_j): negative least-squares slope of log v
/// against log x, last below first, and no step rising by more than max_rise (relative).
/// Tables whose values are all at most floor count as flat, hence decreasing.
struct TrendFit {
    double log_slope = 0.0;
    bool decreasing = false;
    bool flat = false;
};
TrendFit monotone_trend(std::span<const double> x, std::span<const double> v, double max_rise = 0.10,
                        double floor = 0.0);
/// Entry with value 1 for a decreasing trend and 0 otherwise.
ReportEntry trend_entry(std::string name, const TrendFit& fit, std::uint64_t seed = 0);

} // namespace pathcalc
