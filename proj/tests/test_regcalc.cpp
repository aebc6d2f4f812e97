#include <cmath>
#include <random>

#include <doctest.h>

#include "pathcalc/regcalc.hpp"

using namespace pathcalc;

namespace {

// Brute-force midpoint evaluation of the defining integrals, independent of the library's
// cell-wise closed forms.
double brute_forward(const SampledPath& g, const SampledPath& f, double eps, int n = 400000) {
    const double a = g.grid().t_min(), b = g.grid().t_max(), h = (b - a) / n;
    auto F = [&](double s) { return s >= b ? f.values().back() : f.past_value(s); };
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * h;
        s += g.past_value(x) * (F(x + eps) - F(x)) / eps;
    }
    return s * h;
}

double brute_backward(const SampledPath& g, const SampledPath& f, double eps, int n = 400000) {
    const double a = g.grid().t_min(), b = g.grid().t_max(), h = (b - a) / n;
    auto F = [&](double s) { return s < a ? 0.0 : f.past_value(s); };
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * h;
        s += g.past_value(x) * (F(x) - F(x - eps)) / eps;
    }
    return s * h;
}

SampledPath random_path(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(g.n_points());
    for (auto& x : v) x = n(rng);
    return SampledPath(g, v);
}

} // namespace

TEST_CASE("forward approximant of x against 1 on [-1, 0] is 1 - eps / 2") {
    Grid g = past_grid(1.0, 65);
    auto one = make_fixture("constant:1", g), x = make_fixture("linear:1", g);
    for (double eps : {0.2, 0.05, 0.01}) CHECK(forward_approximant(one, x, eps) == doctest::Approx(1.0 - eps / 2));
}

TEST_CASE("approximants agree with brute-force quadrature on random paths") {
    std::mt19937_64 rng(3);
    Grid g = past_grid(1.0, 17);
    for (int k = 0; k < 4; ++k) {
        auto a = random_path(g, rng), b = random_path(g, rng);
        for (double eps : {0.3, 0.07}) {
            CHECK(forward_approximant(a, b, eps) == doctest::Approx(brute_forward(a, b, eps)).epsilon(1e-6));
            CHECK(backward_approximant(a, b, eps) == doctest::Approx(brute_backward(a, b, eps)).epsilon(1e-6));
        }
    }
}

TEST_CASE("constant integrator gives zero") {
    Grid g = past_grid(1.0, 257);
    std::mt19937_64 rng(5);
    auto a = random_path(g, rng);
    auto c = make_fixture("constant:3", g);
    CHECK(forward_approximant(a, c, 0.1) == doctest::Approx(0.0).scale(1.0));
    auto sched = EpsilonSchedule::geometric(0.125, 4);
    CHECK(std::abs(forward_integral(a, c, sched).value) < 1e-12);
}

TEST_CASE("covariation of a line is slope^2 eps x away from the right end") {
    Grid g(0.0, 1.0, 101);
    auto f = sample_path(g, [](double s) { return 1.7 * s; });
    for (double eps : {0.1, 0.01}) CHECK(covariation_approximant(f, f, 0.5, eps) == doctest::Approx(1.7 * 1.7 * 0.5 * eps));
}

TEST_CASE("Richardson removes a first-order term and an observed second-order term") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 20; ++k) {
        double L = u(rng), c = u(rng);
        std::vector<std::pair<double, double>> lin, quad;
        for (double e : {0.1, 0.05, 0.025, 0.0125}) {
            lin.emplace_back(e, L + c * e);
            quad.emplace_back(e, L + c * e * e);
        }
        auto a = estimate_limit(lin, 1e-8), b = estimate_limit(quad, 1e-8);
        CHECK(a.value == doctest::Approx(L).epsilon(1e-10));
        CHECK(b.value == doctest::Approx(L).epsilon(1e-8));
        // Convergence is judged on the raw finest gap, not on the extrapolated value.
        CHECK(a.converged == (std::abs(c) * 0.0125 <= 1e-8));
        CHECK(estimate_limit(lin, 0.03).converged == (std::abs(c) * 0.0125 <= 0.03));
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    std::vector<std::pair<double, double>> raw{{0.1, 1.0}, {0.05, -1.0}, {0.025, 1.0}};
    auto r = estimate_limit(raw, 1e-6);
    CHECK_FALSE(r.converged);
}

TEST_CASE("integration by parts on the piecewise-linear corpus") {
    Grid g = past_grid(1.0, 1025);
    auto sched = EpsilonSchedule::geometric(0.0625, 6);
    std::vector<SampledPath> corpus;
    for (const char* n : {"constant:1", "linear:1", "kinked", "zigzag"}) corpus.push_back(make_fixture(n, g));
    for (const auto& a : corpus)
        for (const auto& b : corpus)
            for (auto dir : {IbpDirection::forward, IbpDirection::backward}) {
                auto e = ibp_check(a, b, dir, sched, 1e-3);
                CHECK(e.pass);
            }
}

TEST_CASE("jump-at-a convention: g = 1, f = x") {
    Grid g = past_grid(1.0, 65);
    auto one = make_fixture("constant:1", g), x = make_fixture("linear:1", g);
    CHECK(ibp_stieltjes(one, x, IbpDirection::forward) == doctest::Approx(1.0));
}

TEST_CASE("backward integral against a pure density equals the measure form") {
    Grid g = past_grid(1.0, 129);
    std::mt19937_64 rng(21);
    auto dens = random_path(g, rng), f = random_path(g, rng);
    AtomicMeasure mu{dens, {}};
    for (double eps : {0.2, 0.05}) {
        double a = backward_approximant(dens, f, eps), b = backward_measure_approximant(mu, f, eps);
        CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("schedules validate against the grid") {
    Grid g = past_grid(1.0, 65);
    CHECK_THROWS(EpsilonSchedule::geometric(0.0625, 8).validate_for(g));
    CHECK_NOTHROW(EpsilonSchedule::geometric(0.25, 3).validate_for(g));
}
