#include <cmath>
#include <limits>

#include <doctest.h>

#include "pathcalc/bsde.hpp"
#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"

using namespace pathcalc;
using V = Eigen::VectorXd;
using M = Eigen::MatrixXd;

namespace {

SDECoeffs bm(std::size_t d = 1) {
    SDECoeffs c;
    c.d = d;
    c.label = "bm";
    c.b = [](double, const V& x) { return V::Zero(x.size()); };
    c.sigma = [d](double, const V&) { return M::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)); };
    c.lipschitz_C = std::sqrt(static_cast<double>(d));
    return c;
}

SDECoeffs ou(double theta, double s) {
    SDECoeffs c;
    c.d = 1;
    c.label = "ou";
    c.b = [theta](double, const V& x) { return V(-theta * x); };
    c.sigma = [s](double, const V&) { return M::Constant(1, 1, s); };
    c.lipschitz_C = std::max(theta, s);
    return c;
}

BSDEProblem problem(SDECoeffs c, Terminal g, Generator f, double lip = 0.0) {
    BSDEProblem p;
    p.coeffs = std::move(c);
    p.g = std::move(g);
    p.f = std::move(f);
    p.f_lipschitz = lip;
    p.g_growth = {1.0, 1.0};
    p.label = "test";
    return p;
}

const Generator zero_f = [](double, const V&, double, const V&) { return 0.0; };

SimConfig config(std::size_t paths, std::size_t steps, std::uint64_t seed = 1) {
    SimConfig cfg;
    cfg.n_paths = paths;
    cfg.n_steps = steps;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("Euler scheme with unit diffusion sums the increments") {
    auto cfg = config(20, 16);
    V x0 = V::Constant(2, 0.5);
    auto p = sde_euler(bm(2), 0.0, x0, cfg);
    M acc = M::Constant(20, 2, 0.5);
    for (std::size_t k = 0; k < 16; ++k) {
        acc += p.dW[k];
        CHECK((p.X[k + 1] - acc).cwiseAbs().maxCoeff() < 1e-14);
    }
    auto q = sde_euler(bm(2), 0.0, x0, cfg);
    CHECK(p.X.back() == q.X.back());
}

TEST_CASE("Ornstein-Uhlenbeck mean") {
    auto cfg = config(20000, 100, 3);
    auto p = sde_euler(ou(0.7, 0.5), 0.0, V::Constant(1, 2.0), cfg);
    std::vector<double> xt(20000);
    for (int i = 0; i < 20000; ++i) xt[static_cast<std::size_t>(i)] = p.X.back()(i, 0);
    auto st = sample_stats(xt);
    // Euler mean is x (1 - theta dt)^N.
    double euler = 2.0 * std::pow(1.0 - 0.7 / 100.0, 100);
    CHECK(std::abs(st.mean - euler) < 4 * st.standard_error);
}

TEST_CASE("non-finite states report the path index") {
    SDECoeffs c = bm();
    c.b = [](double, const V& x) { return V(x.array().square() * 1e200); };
    auto cfg = config(4, 8);
    try {
        sde_euler(c, 0.0, V::Constant(1, 1.0), cfg);
        FAIL("expected a SimulationError");
    } catch (const SimulationError& e) {
        CHECK(e.path_index == 0);
    }
}

TEST_CASE("mollification keeps affine maps and adds the ellipticity floor") {
    SDECoeffs c = ou(0.4, 0.3);
    auto m = mollify_coeffs(c, 5);
    for (double x : {-2.0, 0.0, 1.3}) {
        V v = V::Constant(1, x);
        CHECK(m.b(0.0, v)(0) == doctest::Approx(-0.4 * x).scale(1.0).epsilon(1e-13));
        CHECK(m.sigma(0.0, v)(0, 0) == doctest::Approx(0.3 + 0.2));
    }
    auto g = mollify_terminal([](const V& x) { return 2.0 * x(0) - 1.0; }, 1, 4);
    CHECK(g(V::Constant(1, 0.3)) == doctest::Approx(-0.4));
    // The smoothed |x| lies above |x| and within 1/n of it.
    auto a = mollify_terminal([](const V& x) { return std::abs(x(0)); }, 1, 10);
    for (double x : {-1.0, -0.05, 0.0, 0.02, 0.5}) {
        double v = a(V::Constant(1, x));
        CHECK(v >= std::abs(x) - 1e-14);
        CHECK(v <= std::abs(x) + 0.1);
    }
}

TEST_CASE("Lipschitz certificates survive mollification") {
    SDECoeffs c = bm();
    c.b = [](double, const V& x) { return V(x.cwiseAbs()); };
    c.lipschitz_C = 1.0;
    CHECK(lipschitz_spot_check(c).pass);
    for (std::size_t n : {2, 8, 32}) CHECK(lipschitz_spot_check(mollify_coeffs(c, n)).pass);
    c.lipschitz_C = 0.5;
    CHECK_FALSE(lipschitz_spot_check(c).pass);
}

TEST_CASE("zero generator: Y_0 is the sample mean of the terminal value") {
    auto cfg = config(5000, 20);
    auto p = problem(bm(), [](const V& x) { return std::tanh(x(0)); }, zero_f);
    auto s = bsde_solve(p, Flavor::exact, 0.0, V::Zero(1), cfg);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < s.X.back().rows(); ++i) mean += std::tanh(s.X.back()(i, 0));
    mean /= static_cast<double>(s.X.back().rows());
    CHECK(std::abs(s.y0 - mean) < 1e-12);
    CHECK(s.K.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear generator is a discount") {
    auto cfg = config(2000, 40);
    for (double r : {0.1, 0.5}) {
        auto p = problem(bm(), [](const V&) { return 1.0; }, [r](double, const V&, double y, const V&) { return -r * y; }, r);
        auto s = bsde_solve(p, Flavor::exact, 0.0, V::Zero(1), cfg);
        // Explicit backward Euler for y' = r y gives (1 - r dt)^N.
        CHECK(s.y0 == doctest::Approx(std::pow(1.0 - r / 40.0, 40)).epsilon(1e-10));
        CHECK(s.y0 == doctest::Approx(std::exp(-r)).epsilon(0.01));
    }
}

TEST_CASE("Z of g(x) = x is one") {
    auto cfg = config(20000, 20);
    auto s = bsde_solve(problem(bm(), [](const V& x) { return x(0); }, zero_f), Flavor::exact, 0.0, V::Zero(1), cfg, 2);
    for (Eigen::Index k = 0; k < 20; ++k) CHECK(std::abs(s.Z[0].col(k).mean() - 1.0) < 0.05);
}

TEST_CASE("super and sub flavors bracket the exact solution") {
    auto cfg = config(4000, 20);
    auto p = problem(ou(0.5, 0.8), [](const V& x) { return std::sin(x(0)); }, zero_f);
    p.k_rate = [](double, const V&) { return 0.2; };
    auto e = bsde_solve(p, Flavor::exact, 0.0, V::Zero(1), cfg);
    auto up = bsde_solve(p, Flavor::super, 0.0, V::Zero(1), cfg);
    auto dn = bsde_solve(p, Flavor::sub, 0.0, V::Zero(1), cfg);
    CHECK(up.y0 == doctest::Approx(e.y0 + 0.2).epsilon(1e-9));
    CHECK(dn.y0 == doctest::Approx(e.y0 - 0.2).epsilon(1e-9));
    // K is nondecreasing in magnitude along every path.
    for (Eigen::Index k = 1; k < up.K.cols(); ++k) CHECK((up.K.col(k) - up.K.col(k - 1)).minCoeff() >= 0.0);

    auto bad = p;
    bad.k_rate = [](double, const V&) { return -1.0; };
    CHECK_THROWS(bsde_solve(bad, Flavor::super, 0.0, V::Zero(1), cfg));
}

TEST_CASE("comparison check") {
    auto cfg = config(2000, 10);
    auto lo = problem(bm(), [](const V& x) { return std::tanh(x(0)) - 0.1; }, zero_f);
    auto hi = problem(bm(), [](const V& x) { return std::tanh(x(0)) + 0.1; }, zero_f);
    std::vector<SamplePoint> pts{{0.0, V::Zero(1)}, {0.5, V::Constant(1, 1.0)}};
    CHECK(comparison_check(bsde_value_map(lo, Flavor::exact, cfg), bsde_value_map(hi, Flavor::exact, cfg), pts).pass);
    CHECK_FALSE(comparison_check(bsde_value_map(hi, Flavor::exact, cfg), bsde_value_map(lo, Flavor::exact, cfg), pts).pass);
    CHECK_THROWS_AS(comparison_check(bsde_value_map(lo, Flavor::exact, cfg), bsde_value_map(hi, Flavor::exact, cfg), {}),
                    InvalidArgument);
}

TEST_CASE("a priori estimate") {
    auto cfg = config(3000, 20);
    auto p = problem(bm(), [](const V& x) { return std::tanh(x(0)); }, zero_f);
    auto r = apriori_check(bsde_solve(p, Flavor::exact, 0.0, V::Zero(1), cfg), p);
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs > 0.0);
    CHECK(r.constant == doctest::Approx(r.lhs / (2.0 * r.rhs)));
    CHECK(apriori_stability({0.4, 0.5, 0.7}, 2.0).pass);
    CHECK_FALSE(apriori_stability({0.2, 0.5}, 2.0).pass);
}

TEST_CASE("mollified SDE converges to the raw one") {
    SDECoeffs c = bm();
    c.b = [](double, const V& x) { return V(x.cwiseAbs()); };
    auto tab = sde_convergence(c, 0.0, V::Zero(1), {2, 8, 32}, config(300, 50));
    CHECK(tab.errors[0] > tab.errors[1]);
    CHECK(tab.errors[1] > tab.errors[2]);
    // Without drift or diffusion the difference is W / n.
    SDECoeffs z = bm();
    z.sigma = [](double, const V&) { return M::Zero(1, 1); };
    z.lipschitz_C = 0.0;
    auto zt = sde_convergence(z, 0.0, V::Zero(1), {2, 4, 8}, config(300, 50));
    CHECK(zt.errors[0] * 4 == doctest::Approx(zt.errors[1] * 16).epsilon(1e-12));
    CHECK(zt.errors[2] * 64 == doctest::Approx(zt.errors[1] * 16).epsilon(1e-12));
}

TEST_CASE("limit diagnostic") {
    auto p = problem(bm(), [](const V& x) { return std::abs(x(0)); }, zero_f);
    CHECK_THROWS_AS(limit_diagnostic(p, 0.0, V::Zero(1), {4}, 16, 2.0, config(100, 10)), InvalidArgument);
    auto tab = limit_diagnostic(p, 0.0, V::Zero(1), {2, 8}, 64, 1.0, config(2000, 20));
    CHECK(tab.errors[1] < tab.errors[0]);
}

TEST_CASE("problem validation") {
    auto p = problem(bm(), [](const V& x) { return x(0); }, zero_f);
    p.coeffs.d = 4;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.coeffs.d = 1;
    p.f = nullptr;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}
