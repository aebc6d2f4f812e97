#include <cmath>

#include <doctest.h>

#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/simflow.hpp"

using namespace pathcalc;

TEST_CASE("Brownian paths depend only on seed and index") {
    SimConfig cfg;
    cfg.n_steps = 64;
    cfg.n_paths = 50;
    cfg.seed = 17;
    cfg.workers = 1;
    auto a = simulate_bm(cfg);
    cfg.workers = 3;
    auto b = simulate_bm(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values() == b[i].values());
    CHECK(simulate_bm_path(cfg, 7).values() == a[7].values());
    CHECK(a[0].values() != a[1].values());
}

TEST_CASE("terminal moments of Brownian motion") {
    SimConfig cfg;
    cfg.n_steps = 16;
    cfg.n_paths = 20000;
    cfg.T = 2.0;
    cfg.seed = 5;
    auto paths = simulate_bm(cfg);
    std::vector<double> w, w2;
    for (const auto& p : paths) {
        w.push_back(p.values().back());
        w2.push_back(p.values().back() * p.values().back());
    }
    auto m1 = sample_stats(w), m2 = sample_stats(w2);
    CHECK(std::abs(m1.mean) < 4 * m1.standard_error);
    CHECK(std::abs(m2.mean - 2.0) < 4 * m2.standard_error);
}

TEST_CASE("flow window: history before t, present plus increments after") {
    Grid g = past_grid(1.0, 129);
    auto eta = make_fixture("sine", g);
    const double t = 0.25;
    auto fs = sample_flow(t, eta, 1.0, g, 3, 0);
    auto w0 = flow_window(fs, t, g);
    for (std::size_t i = 0; i < g.n_points(); ++i) CHECK(w0.values()[i] == doctest::Approx(eta.values()[i]).epsilon(1e-12));
    auto wT = flow_window(fs, 1.0, g);
    // Nodes with x <= t - T carry the shifted history.
    for (std::size_t i = 0; i < g.n_points(); ++i) {
        double x = g.point(i);
        if (x <= t - 1.0 + 1e-12) CHECK(wT.values()[i] == doctest::Approx(eta.past_value(x + 1.0 - t)).epsilon(1e-12));
    }
}

TEST_CASE("Ito residual of a smooth Markov functional shrinks with the regularization") {
    // u = x^2 - t is a martingale functional: u_t + u_xx / 2 = 0.
    auto u = ito_markov("x2-t", [](double t, double x) { return x * x - t; }, [](double, double) { return -1.0; },
                        [](double, double x) { return 2 * x; }, [](double, double) { return 2.0; });
    SimConfig cfg;
    cfg.n_steps = 4096;
    cfg.n_paths = 1;
    cfg.seed = 2;
    auto X = simulate_bm_path(cfg, 0);
    Grid g = past_grid(1.0, 257);
    double coarse = 0.0, fine = 0.0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        cfg.seed = s;
        auto path = simulate_bm_path(cfg, 0);
        coarse += ito_verify(u, path, 1.0 / 32, g).sup_residual;
        fine += ito_verify(u, path, 1.0 / 512, g).sup_residual;
    }
    CHECK(fine < coarse);
    auto r = ito_verify(u, X, 1.0 / 512, g);
    CHECK(r.times.size() == r.residual.size());
    CHECK(r.nonconverged == 0);
}

TEST_CASE("martingale check separates a martingale from a drift") {
    SimConfig cfg;
    cfg.n_steps = 32;
    cfg.n_paths = 4000;
    cfg.seed = 8;
    auto paths = simulate_bm(cfg);
    Eigen::MatrixXd m(4000, 33), d(4000, 33);
    for (int p = 0; p < 4000; ++p)
        for (int k = 0; k <= 32; ++k) {
            m(p, k) = paths[p].values()[k];
            d(p, k) = paths[p].values()[k] + 0.5 * paths[p].times()[k];
        }
    CHECK(martingale_check(m, 4.0).pass);
    CHECK_FALSE(martingale_check(d, 4.0).pass);
}

TEST_CASE("bad configurations are rejected") {
    SimConfig cfg;
    cfg.n_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.n_steps = 4;
    cfg.T = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("parallel_for and pairwise_sum do not depend on the worker count") {
    std::vector<double> v(10007);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i)) * 1e-3 + 1.0;
    std::vector<double> a(v.size()), b(v.size());
    parallel_for(v.size(), 1, [&](std::size_t i) { a[i] = v[i] * v[i]; });
    parallel_for(v.size(), 4, [&](std::size_t i) { b[i] = v[i] * v[i]; });
    CHECK(a == b);
    CHECK(pairwise_sum(a) == pairwise_sum(b));
    CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
        if (i == 7) throw InvalidArgument("boom");
    }));
}
