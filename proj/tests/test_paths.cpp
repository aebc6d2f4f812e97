#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "pathcalc/errors.hpp"
#include "pathcalc/paths.hpp"

using namespace pathcalc;

TEST_CASE("grid endpoints and spacing") {
    Grid g(-2.0, 1.0, 7);
    CHECK(g.point(0) == -2.0);
    CHECK(g.point(6) == 1.0);
    CHECK(g.spacing() == doctest::Approx(0.5));
    auto p = past_grid(0.5, 3);
    CHECK(p.t_min() == -0.5);
    CHECK(p.t_max() == 0.0);
}

TEST_CASE("interpolation reproduces affine functions between nodes") {
    Grid g = past_grid(1.0, 17);
    auto p = sample_path(g, [](double x) { return 3.0 * x - 1.0; });
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 0.0);
    for (int k = 0; k < 200; ++k) {
        double x = u(rng);
        CHECK(p.past_value(x) == doctest::Approx(3.0 * x - 1.0).epsilon(1e-14));
    }
    // Constant outside the grid.
    CHECK(p.past_value(-5.0) == doctest::Approx(-4.0));
    CHECK(p.past_value(3.0) == doctest::Approx(-1.0));
}

TEST_CASE("present value governs the right end only") {
    Grid g = past_grid(1.0, 5);
    auto p = sample_path(g, [](double x) { return x; }, 2.0);
    CHECK(p.present_value() == 2.0);
    CHECK(value_at(p, 0.0) == 2.0);
    CHECK(value_at(p, -1.0) == -1.0);
    CHECK(p.sup_norm() == 2.0);
    auto s = split(p);
    CHECK_FALSE(s.past.present().has_value());
    CHECK(join(s.past, s.present) == p);
}

TEST_CASE("shift_past moves the past right with a constant left extension") {
    Grid g = past_grid(1.0, 101);
    auto p = sample_path(g, [](double x) { return x * x; });
    const double eps = 0.1;
    auto q = shift_past(p, eps);
    for (std::size_t i = 0; i < g.n_points(); ++i) {
        double x = g.point(i);
        double expect = x - eps < -1.0 ? 1.0 : (x - eps) * (x - eps);
        CHECK(q.values()[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(q.present_value() == p.present_value());
}

TEST_CASE("fixtures") {
    Grid g = past_grid(1.0, 1025);
    auto c = make_fixture("constant:2.5", g);
    for (double v : c.values()) CHECK(v == 2.5);
    auto z = make_fixture("zigzag", g);
    CHECK(z.values().front() == doctest::Approx(0.0));
    CHECK(z.values()[256] == doctest::Approx(1.0));
    CHECK(z.values()[512] == doctest::Approx(0.0).epsilon(1e-12));
    auto s = make_fixture("sine", g);
    CHECK(std::abs(s.values().front()) < 1e-12);
    CHECK(std::abs(s.values().back()) < 1e-12);
    CHECK(make_fixture("brownian:3", g) == make_fixture("brownian(3)", g));
    CHECK_THROWS_AS(make_fixture("no-such-path", g), InvalidArgument);
    for (const auto& name : fixture_names()) CHECK_NOTHROW(make_fixture(name, g));
}

TEST_CASE("brownian samples: start at zero, reproducible, increments of variance h") {
    Grid g(0.0, 1.0, 4097);
    auto a = brownian_path(g, 11), b = brownian_path(g, 11), c = brownian_path(g, 11, 1);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.values().front() == 0.0);
    // Realized quadratic variation over 4096 increments: mean h, relative sd sqrt(2/4096).
    double qv = 0.0;
    for (std::size_t i = 1; i < a.values().size(); ++i) qv += std::pow(a.values()[i] - a.values()[i - 1], 2);
    CHECK(std::abs(qv - 1.0) < 5.0 * std::sqrt(2.0 / 4096.0));
}

TEST_CASE("integrate_against is exact for polynomial products") {
    Grid g = past_grid(1.0, 9);
    auto p = sample_path(g, [](double x) { return 2.0 * x + 1.0; });
    // int_{-1}^0 (2x + 1) x^2 dx = -1/2 + 1/3.
    CHECK(integrate_against(p, [](double x) { return x * x; }, -1.0, 0.0) ==
          doctest::Approx(-0.5 + 1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(Grid(0.0, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(Grid(1.0, 0.0, 5), InvalidArgument);
    CHECK_THROWS_AS(SampledPath(Grid(0.0, 1.0, 3), {1.0, 2.0}), InvalidArgument);
}
