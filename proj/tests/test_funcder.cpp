#include <cmath>
#include <string>

#include <doctest.h>

#include "pathcalc/errors.hpp"
#include "pathcalc/funcder.hpp"

using namespace pathcalc;

namespace {

double trapezoid(const SampledPath& p, double lo) {
    // int_lo^0 of the interpolated past, by a fine midpoint rule.
    const int n = 200000;
    const double h = -lo / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += p.past_value(lo + (i + 0.5) * h);
    return s * h;
}

} // namespace

TEST_CASE("present-value functionals have the textbook vertical derivatives") {
    Grid g = past_grid(1.0, 257);
    auto eta = make_fixture("sine", g);
    auto eta2 = join(eta, 0.7);
    auto sq = make_functional("present-squared");
    auto [dv, dvv] = vertical_derivatives(sq, 1.0, eta2, default_vertical_schedule(0.7));
    CHECK(dv.value == doctest::Approx(1.4).epsilon(1e-8));
    CHECK(dvv.value == doctest::Approx(2.0).epsilon(1e-6));
    auto pr = make_functional("present");
    auto dh = horizontal_derivative(pr, 1.0, eta2, default_horizontal_schedule(g));
    CHECK(std::abs(dh.value) < 1e-12);
}

TEST_CASE("coordinates of simple bases") {
    Grid g = past_grid(1.0, 513);
    auto eta = make_fixture("linear:1", g);
    CylindricalFunctional c;
    c.T = 1.0;
    c.basis = {basis_constant(1.0), basis_polynomial({0.0, 1.0})};
    c.outer = outer_linear(Eigen::Vector2d(1.0, 1.0));
    for (double t : {0.2, 0.6, 1.0}) {
        auto x = cyl_coordinates(c, t, eta);
        CHECK(x(0) == doctest::Approx(eta.present_value()));
        // eta(0) t - int_{-t}^0 eta = 0 - (-t^2 / 2).
        CHECK(x(1) == doctest::Approx(t * t / 2).epsilon(1e-10));
    }
}

TEST_CASE("closed-form derivatives match finite differences on the corpus") {
    Grid g = past_grid(1.0, 513);
    for (const char* path : {"sine", "brownian:4"}) {
        auto eta = make_fixture(path, g);
        for (const auto& c : cylindrical_corpus()) {
            auto u = make_functional("cylindrical(" + c.label + ")");
            const double t = 1.0;
            auto cf = cyl_closed_form(c, t, eta);
            CHECK(cf.value == doctest::Approx(u(t, eta)).epsilon(1e-12));
            auto d = derivatives(u, t, eta);
            const double scale = 1.0 + std::abs(cf.dv) + std::abs(cf.dvv);
            CHECK(std::abs(d.dv.value - cf.dv) < 1e-5 * scale);
            CHECK(std::abs(d.dvv.value - cf.dvv) < 1e-4 * scale);
            if (std::string(path) == "sine") CHECK(std::abs(d.dh.value - cf.dh) < 2e-3 * (1.0 + std::abs(cf.dh)));
        }
    }
}

TEST_CASE("horizontal derivative of a rough path, resolved inside the last cell") {
    // On a Brownian sample the right-end window term fluctuates like sqrt(eps) for grid-sized
    // shifts. Refining the interpolant 32x and shifting by a few fine cells keeps the window
    // inside one linear piece, where the difference quotient is smooth in eps again.
    Grid g = past_grid(1.0, 513);
    Grid fine = past_grid(1.0, 512 * 32 + 1);
    auto eta = make_fixture("brownian:4", g);
    auto eta_fine = sample_path(fine, [&](double x) { return eta.past_value(x); }, eta.present_value());
    EpsilonSchedule sched;
    for (double k : {8.0, 4.0, 2.0, 1.0}) sched.eps_values.push_back(k * fine.spacing());
    for (const auto& c : cylindrical_corpus()) {
        auto u = make_functional("cylindrical(" + c.label + ")");
        auto cf = cyl_closed_form(c, 1.0, eta);
        auto dh = horizontal_derivative(u, 1.0, eta_fine, sched);
        CHECK(std::abs(dh.value - cf.dh) < 2e-3 * (1.0 + std::abs(cf.dh)));
    }
}

TEST_CASE("time rates of coordinates against a difference quotient") {
    Grid g = past_grid(1.0, 1025);
    auto eta = make_fixture("gauss-cdf", g);
    for (const auto& c : cylindrical_corpus()) {
        const double t = 0.4, h = 1e-5;
        Eigen::VectorXd fd = (cyl_coordinates(c, t + h, eta) - cyl_coordinates(c, t - h, eta)) / (2 * h);
        CHECK((fd - cyl_time_rates(c, t, eta)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("integral functional against an independent quadrature") {
    Grid g = past_grid(1.0, 129);
    auto eta = make_fixture("brownian:2", g);
    auto u = make_functional("integral");
    CHECK(u(1.0, eta) == doctest::Approx(trapezoid(eta, -1.0)).epsilon(1e-8));
}

TEST_CASE("sup functional and growth certificates") {
    Grid g = past_grid(1.0, 129);
    auto eta = make_fixture("kinked", g);
    auto sup = make_functional("sup");
    CHECK(sup(1.0, eta) == doctest::Approx(0.6));
    CHECK(sup.growth.has_value());
    for (const char* name : {"present", "present-squared", "integral", "sup"}) {
        auto u = make_functional(name);
        REQUIRE(u.growth);
        // |u| <= C (1 + |eta|^m) on every fixture.
        for (const auto& f : fixture_names()) {
            auto p = make_fixture(f, g);
            CHECK(std::abs(u(1.0, p)) <= u.growth->C * (1.0 + std::pow(p.sup_norm(), u.growth->m)) + 1e-12);
        }
    }
    CHECK_THROWS_AS(make_functional("nope"), InvalidArgument);
}

TEST_CASE("Frechet representation of cylindrical horizontal derivatives") {
    Grid g = past_grid(1.0, 1025);
    auto eta = make_fixture("sine", g);
    auto sched = EpsilonSchedule::geometric(0.0625, 5);
    for (const char* name : {"cyl0", "cyl3", "cyl7"}) {
        auto e = frechet_rep_check(frechet_from_cylindrical(cylindrical_fixture(name)), eta, sched);
        CHECK(e.pass);
    }
}
