#include <cmath>
#include <limits>

#include <doctest.h>

#include "pathcalc/report.hpp"

using namespace pathcalc;

TEST_CASE("entry semantics") {
    auto a = check_close("a", 1.05, 1.0, 0.1, "x");
    CHECK(a.pass);
    CHECK(a.gap == doctest::Approx(0.05));
    auto b = check_at_most("b", 3.0, 2.0, 0.5, "x");
    CHECK_FALSE(b.pass);
    CHECK(b.gap == doctest::Approx(1.0));
    auto c = check_at_least("c", 1.0, 2.0, 1.5, "x");
    CHECK(c.pass);
    auto n = note_value("n", 123.0, 0.0, "x");
    CHECK(n.pass);
    CHECK(std::isinf(n.tolerance));
    // pass is gap <= tolerance, also at equality.
    CHECK(check_close("e", 1.0, 1.0, 0.0, "x").pass);
    CHECK_FALSE(check_close("nan", NAN, 1.0, 1.0, "x").pass);
}

TEST_CASE("report JSON round-trips") {
    VerificationReport r;
    r.meta = {"1.2.3", "2026-01-01T00:00:00Z", "abc", {"first", "second"}};
    r.add(check_close("x", 0.1 + 0.2, 0.3, 1e-12, "sum", 42));
    r.add(note_value("y", 1.0 / 3.0, 0.0, "third", 7));
    r.add(check_at_most("z", 5.0, 1.0, 0.0, "fail", 1));
    auto back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
    REQUIRE(back.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries[i].name == r.entries[i].name);
        CHECK(back.entries[i].value == r.entries[i].value);
        CHECK(back.entries[i].reference == r.entries[i].reference);
        CHECK(back.entries[i].gap == r.entries[i].gap);
        CHECK(back.entries[i].pass == r.entries[i].pass);
        CHECK(back.entries[i].seed == r.entries[i].seed);
        CHECK(back.entries[i].oracle == r.entries[i].oracle);
    }
    CHECK(std::isinf(back.entries[1].tolerance));
    CHECK(back.meta.notes == r.meta.notes);
    CHECK(content_hash(back) == content_hash(r));
    CHECK_FALSE(back.all_pass());
}

TEST_CASE("content hash ignores the timestamp only") {
    VerificationReport a;
    a.meta.config_hash = "h";
    a.add(check_close("x", 1.0, 1.0, 0.0, "o"));
    auto b = a;
    b.meta.timestamp = "later";
    CHECK(content_hash(a) == content_hash(b));
    b.entries[0].value = std::nextafter(1.0, 2.0);
    CHECK(content_hash(a) != content_hash(b));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("monotone trend") {
    std::vector<double> x{4, 8, 16, 32};
    CHECK(monotone_trend(x, std::vector<double>{1.0, 0.5, 0.25, 0.125}).decreasing);
    CHECK(monotone_trend(x, std::vector<double>{1.0, 0.5, 0.25, 0.125}).log_slope == doctest::Approx(-1.0));
    CHECK_FALSE(monotone_trend(x, std::vector<double>{1.0, 0.5, 0.7, 0.1}).decreasing);
    CHECK(monotone_trend(x, std::vector<double>{1.0, 0.5, 0.52, 0.1}).decreasing);
    CHECK_FALSE(monotone_trend(x, std::vector<double>{0.1, 0.2, 0.3, 0.4}).decreasing);
    auto flat = monotone_trend(x, std::vector<double>{0.0, 0.0, 1e-15, 0.0}, 0.1, 1e-12);
    CHECK(flat.flat);
    CHECK(flat.decreasing);
    CHECK(trend_entry("t", flat).pass);
}
