#include <cmath>
#include <random>

#include <doctest.h>

#include "pathcalc/approx.hpp"
#include "pathcalc/errors.hpp"
#include "pathcalc/quadrature.hpp"

using namespace pathcalc;

namespace {

double sup_diff(const SampledPath& a, const SampledPath& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

// Composite Simpson on [lo, hi], independent of the library's quadrature.
template <class F>
double simpson(F f, double lo, double hi, int n = 20000) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("trigonometric basis: orthonormal, antiderivatives and moments") {
    for (double T : {1.0, 2.5}) {
        TrigBasis b(T);
        CHECK(b.e(0, -0.3) == doctest::Approx(1.0 / std::sqrt(T)));
        for (std::size_t i = 0; i <= 6; ++i) {
            for (std::size_t j = 0; j <= 6; ++j) {
                double ip = simpson([&](double x) { return b.e(i, x) * b.e(j, x); }, -T, 0.0);
                CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
            }
            double x = -0.37 * T;
            CHECK(b.anti(i, x) == doctest::Approx(simpson([&](double s) { return b.e(i, s); }, -T, x)).scale(1.0).epsilon(1e-10));
            double mom = simpson([&](double s) { return s * b.e(i, s); }, -T, 0.0) / T;
            CHECK(b.moment(i) == doctest::Approx(mom).scale(1.0).epsilon(1e-10));
            CHECK(b.de(i, x) == doctest::Approx((b.e(i, x + 1e-6) - b.e(i, x - 1e-6)) / 2e-6).scale(1.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("Fejer weights") {
    FejerOperator op(7);
    CHECK(op.weight(0) == 1.0);
    for (std::size_t i = 0; i <= 7; ++i) {
        CHECK(op.weight(i) > 0.0);
        CHECK(op.weight(i) <= 1.0);
        CHECK(op.weight(i) == doctest::Approx((8.0 - i) / 8.0));
    }
}

TEST_CASE("mollifier: unit mass, support and antiderivative") {
    for (double eps : {1.0, 0.25, 0.01}) {
        Mollifier m(eps);
        CHECK(simpson([&](double x) { return m.phi(x); }, -1.0, -1.0 + eps) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(m.phi(-1.0 + eps + 1e-9) == 0.0);
        CHECK(m.phi(-0.5 * (2.0 - eps)) > 0.0);
        CHECK(m.anti(0.0) == doctest::Approx(1.0).epsilon(1e-8));
        double x = -1.0 + 0.3 * eps;
        CHECK(m.anti(x) == doctest::Approx(simpson([&](double s) { return m.phi(s); }, -1.0, x)).epsilon(1e-7));
    }
}

TEST_CASE("lambda operator") {
    Grid g = past_grid(1.0, 101);
    auto q = lambda_op(make_fixture("quadratic", g));
    for (std::size_t i = 0; i < g.n_points(); ++i) CHECK(q.values()[i] == doctest::Approx(-g.point(i)).scale(1.0));
    auto lin = make_fixture("linear:0.7", g);
    CHECK(sup_diff(lambda_op(lin), lin) < 1e-15);
    auto c = lambda_op(make_fixture("constant:3", g));
    for (double v : c.values()) CHECK(v == 0.0);
    // (eta - Lambda eta) has equal endpoint values.
    auto eta = make_fixture("brownian:7", g);
    auto l = lambda_op(eta);
    CHECK(eta.values().front() - l.values().front() == doctest::Approx(eta.values().back() - l.values().back()));
}

TEST_CASE("Fourier coefficients") {
    Grid g = past_grid(1.0, 1025);
    auto c = fourier_coeffs(make_fixture("constant:2", g), 10);
    CHECK(c.stieltjes(0) == doctest::Approx(2.0));
    for (int i = 1; i <= 10; ++i) CHECK(std::abs(c.stieltjes(i)) < 1e-12);
    auto lin = fourier_coeffs(make_fixture("linear:1", g), 10);
    CHECK(lin.stieltjes.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(lin.x_minus1 == doctest::Approx(1.0));
    for (const char* name : {"sine", "brownian:1", "zigzag"}) {
        auto f = fourier_coeffs(make_fixture(name, g), 32);
        CHECK((f.stieltjes - f.l2).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("Fejer means: exactness, linearity, damping and convergence") {
    Grid g = past_grid(1.0, 513);
    for (const char* name : {"constant:-1.5", "linear:2", "linear:-0.3"}) {
        auto eta = make_fixture(name, g);
        for (std::size_t n : {1, 5, 40}) CHECK(sup_diff(fejer_apply(FejerOperator(n), eta), eta) < 1e-12);
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto a = make_fixture("kinked", g), b = make_fixture("brownian:3", g);
    for (int k = 0; k < 5; ++k) {
        double al = u(rng), be = u(rng);
        std::vector<double> v(g.n_points());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = al * a.values()[i] + be * b.values()[i];
        FejerOperator op(16);
        auto lhs = fejer_apply(op, SampledPath(g, v));
        auto ta = fejer_apply(op, a), tb = fejer_apply(op, b);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(std::abs(lhs.values()[i] - al * ta.values()[i] - be * tb.values()[i]) < 1e-10);
    }
    for (const char* name : {"sine", "zigzag", "brownian:2", "gauss-cdf"}) {
        auto eta = make_fixture(name, g);
        auto l = lambda_op(eta);
        std::vector<double> r(g.n_points());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = eta.values()[i] - l.values()[i];
        double base = SampledPath(g, r).sup_norm();
        for (std::size_t n : {2, 8, 32}) CHECK(cesaro_residual(FejerOperator(n), eta).sup_norm() <= base * (1 + 1e-12) + 1e-14);
    }
    auto s = make_fixture("sine", g);
    double e8 = sup_diff(fejer_apply(FejerOperator(8), s), s), e64 = sup_diff(fejer_apply(FejerOperator(64), s), s);
    CHECK(e64 < 0.5 * e8);
}

TEST_CASE("endpoint functional") {
    Grid g = past_grid(1.0, 1025);
    Mollifier m(0.1);
    CHECK(endpoint_functional(m, make_fixture("constant:2", g)) == doctest::Approx(2.0).epsilon(1e-12));
    double v = endpoint_functional(m, make_fixture("linear:1", g));
    CHECK(std::abs(v + 1.0) <= 0.1);
    // Independent oracle: int eta phi_eps for eta = x.
    CHECK(v == doctest::Approx(simpson([&](double x) { return x * m.phi(x); }, -1.0, -0.9)).epsilon(1e-8));
    for (const char* name : {"sine", "brownian:5", "kinked"}) {
        auto eta = make_fixture(name, g);
        for (double eps : {0.3, 0.05})
            CHECK(endpoint_functional(Mollifier(eps), eta) ==
                  doctest::Approx(endpoint_functional_l2(Mollifier(eps), eta)).epsilon(1e-8));
    }
}

TEST_CASE("approximations G_{n,eps,k}") {
    Grid g = past_grid(1.0, 257);
    PathFunctional bare{[](double, const SampledPath& e) { return e.present_value(); }, "bare", std::nullopt};
    CHECK_THROWS_AS(build_Gnek(bare, 4, 0.25, 16), InvalidArgument);

    auto sched = diagonal_schedule({4, 10});
    CHECK(sched[1].n == 10);
    CHECK(sched[1].k == 100.0);
    CHECK(sched[1].eps == doctest::Approx(0.1));

    // Linear terminal functional: the expectation is the integral of the mean window.
    auto a = build_Gnek(make_functional("integral"), 8, 0.125, 64, 1.0, 257, Quadrature::monte_carlo(4000, 1));
    auto zero = make_fixture("constant:0", g);
    auto v = sv_value(a, 0.0, zero);
    CHECK(std::abs(v.value) < 4 * v.standard_error + 1e-9);
    auto c = make_fixture("constant:1.5", g);
    auto vc = sv_value(a, 0.5, c);
    CHECK(std::abs(vc.value - 1.5) < 4 * vc.standard_error + 1e-9);
    CHECK_THROWS_AS(a.cyl.outer.gradient(Eigen::VectorXd::Zero(10)), UnsupportedFunctional);
}
