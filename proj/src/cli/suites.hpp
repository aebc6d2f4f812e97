#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "pathcalc/paths.hpp"
#include "pathcalc/report.hpp"

namespace pathcalc::cli {

struct SuiteContext {
    const nlohmann::json& opt;
    std::uint64_t seed;
    unsigned workers;
};

struct SuiteOutput {
    VerificationReport report;
    std::map<std::string, std::string> plots;
};

SuiteOutput suite_regint(const SuiteContext& ctx);
SuiteOutput suite_ito(const SuiteContext& ctx);
SuiteOutput suite_heat(const SuiteContext& ctx);
SuiteOutput suite_lookback(const SuiteContext& ctx);
SuiteOutput suite_fejer(const SuiteContext& ctx);
SuiteOutput suite_sv(const SuiteContext& ctx);
SuiteOutput suite_bsde(const SuiteContext& ctx);

/// Fixture lookup that reports unknown names as configuration errors.
SampledPath fixture(const std::string& desc, const Grid& grid);

/// Accumulates CSV rows with full double precision.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);
    template <class... A>
    void row(const A&... cells) {
        std::string line;
        ((line += cell(cells) + ","), ...);
        line.back() = '\n';
        text_ += line;
    }
    const std::string& str() const { return text_; }

private:
    static std::string cell(double v) { return fmt::format("{:.17g}", v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    std::string text_;
};

template <class T>
std::vector<T> list(const nlohmann::json& opt, const char* key) {
    return opt.at(key).get<std::vector<T>>();
}

} // namespace pathcalc::cli
