#include "pathcalc/ppde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/quadrature.hpp"
#include "pathcalc/rng.hpp"

namespace pathcalc {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

GaussianCylModel::GaussianCylModel(CylindricalFunctional c, double simpson_tol)
    : c_(std::move(c)), tol_(simpson_tol) {
    if (c_.dim() == 0) throw InvalidArgument("GaussianCylModel: empty basis");
}

Eigen::MatrixXd GaussianCylModel::covariance(double t) const {
    if (!(t >= 0.0 && t <= c_.T)) throw InvalidArgument("GaussianCylModel: t outside [0, T]");
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    if (t < c_.T) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const auto& a = c_.basis[static_cast<std::size_t>(i)].phi;
                const auto& b = c_.basis[static_cast<std::size_t>(j)].phi;
                S(i, j) = S(j, i) = adaptive_simpson([&](double s) { return a(s) * b(s); }, t, c_.T, tol_);
            }
        }
    }
    if (smoothing_ > 0.0) S.diagonal().array() += smoothing_;
    return S;
}

Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& S) {
    const auto n = S.rows();
    if (n != S.cols()) throw InvalidArgument("gaussian_factor: matrix not square");
    if (S.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(n, 0);
    const double scale = S.diagonal().cwiseAbs().maxCoeff();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    Eigen::VectorXd d = ldlt.vectorD();
    const double tol = 1e-10 * scale;
    if (d.minCoeff() < -tol) throw NumericalDegeneracy("gaussian_factor: covariance is indefinite");
    Eigen::MatrixXd L = ldlt.matrixL();
    Eigen::MatrixXd PL = ldlt.transpositionsP().transpose() * L;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d(i) > 1e-14 * scale) keep.push_back(i);
    Eigen::MatrixXd F(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        F.col(static_cast<Eigen::Index>(k)) = PL.col(keep[k]) * std::sqrt(d(keep[k]));
    return F;
}

namespace {

// Visits (y, weight) over the quadrature for N(x, F F'). Gauss-Hermite nodes whose tensor weight
// is negligible are skipped.
template <class Visit>
void for_each_node(const Eigen::VectorXd& x, const Eigen::MatrixXd& F, const Quadrature& q, Visit&& visit) {
    const auto r = F.cols();
    if (r == 0) {
        visit(x, 1.0);
        return;
    }
    if (q.kind == Quadrature::Kind::gauss_hermite) {
        if (r > 4) throw InvalidArgument("Gauss-Hermite tensor quadrature limited to rank 4");
        auto rule = gauss_hermite(q.order);
        const auto m = static_cast<std::size_t>(q.order);
        std::size_t total = 1;
        for (Eigen::Index k = 0; k < r; ++k) total *= m;
        Eigen::VectorXd z(r), y(x.size());
        std::vector<std::size_t> idx(static_cast<std::size_t>(r));
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t f = flat;
            double w = 1.0;
            for (Eigen::Index k = 0; k < r; ++k) {
                idx[static_cast<std::size_t>(k)] = f % m;
                f /= m;
                w *= rule.weights[idx[static_cast<std::size_t>(k)]];
            }
            if (w < 1e-22) continue;
            for (Eigen::Index k = 0; k < r; ++k) z(k) = rule.nodes[idx[static_cast<std::size_t>(k)]];
            y.noalias() = x + F * z;
            visit(y, w);
        }
        return;
    }
    if (q.n_samples == 0) throw InvalidArgument("Monte Carlo quadrature needs samples");
    NormalStream g(q.seed, 0, 0x70736971ULL);
    Eigen::VectorXd z(r), y(x.size());
    const double w = 1.0 / static_cast<double>(q.n_samples);
    for (std::size_t i = 0; i < q.n_samples; ++i) {
        for (Eigen::Index k = 0; k < r; ++k) z(k) = g();
        y.noalias() = x + F * z;
        visit(y, w);
    }
}

void check_t(const GaussianCylModel& m, double t) {
    if (!(t >= 0.0 && t <= m.T())) throw InvalidArgument("Psi: t outside [0, T]");
}

} // namespace

Expectation psi_eval(const GaussianCylModel& model, double t, const Eigen::VectorXd& x, const Quadrature& quad) {
    check_t(model, t);
    if (static_cast<std::size_t>(x.size()) != model.dim()) throw InvalidArgument("psi_eval: dimension mismatch");
    const auto& g = model.functional().outer.value;
    Eigen::MatrixXd F = gaussian_factor(model.covariance(t));
    if (quad.kind == Quadrature::Kind::gauss_hermite) {
        double s = 0.0;
        for_each_node(x, F, quad, [&](const Eigen::VectorXd& y, double w) { s += w * g(y); });
        return {s, 0.0};
    }
    std::vector<double> vals;
    vals.reserve(quad.n_samples);
    for_each_node(x, F, quad, [&](const Eigen::VectorXd& y, double) { vals.push_back(g(y)); });
    auto st = sample_stats(vals);
    return {st.mean, st.standard_error};
}

PsiDerivatives psi_derivatives(const GaussianCylModel& model, double t, const Eigen::VectorXd& x,
                               const Quadrature& quad) {
    check_t(model, t);
    const auto n = static_cast<Eigen::Index>(model.dim());
    if (x.size() != n) throw InvalidArgument("psi_derivatives: dimension mismatch");
    const auto& outer = model.functional().outer;
    Eigen::MatrixXd F = gaussian_factor(model.covariance(t));
    PsiDerivatives d;
    d.dx = Eigen::VectorXd::Zero(n);
    d.dxx = Eigen::MatrixXd::Zero(n, n);
    double wsum = 0.0;
    for_each_node(x, F, quad, [&](const Eigen::VectorXd& y, double w) {
        d.dx += w * outer.gradient(y);
        d.dxx += w * outer.hessian(y);
        wsum += w;
    });
    d.dx /= wsum;
    d.dxx /= wsum;
    Eigen::VectorXd p = model.functional().phi(t);
    d.dt = -0.5 * p.dot(d.dxx * p);
    return d;
}

double classical_solution(const CylindricalFunctional& c, double t, const SampledPath& eta, const Quadrature& quad) {
    return classical_solution(GaussianCylModel(c), t, eta, quad).value;
}

Expectation classical_solution(const GaussianCylModel& model, double t, const SampledPath& eta,
                               const Quadrature& quad) {
    return psi_eval(model, t, cyl_coordinates(model.functional(), t, eta), quad);
}

HeatTerms heat_terms(const GaussianCylModel& model, double t, const SampledPath& eta, const Quadrature& quad) {
    const auto& c = model.functional();
    Eigen::VectorXd x = cyl_coordinates(c, t, eta);
    auto d = psi_derivatives(model, t, x, quad);
    Eigen::VectorXd p = c.phi(t);
    HeatTerms h;
    h.dt = d.dt + d.dx.dot(cyl_time_rates(c, t, eta));
    h.dh = -d.dx.dot(cyl_shift_rates(c, t, eta));
    h.dv = d.dx.dot(p);
    h.dvv = p.dot(d.dxx * p);
    return h;
}

double heat_residual(const CylindricalFunctional& c, double t, const SampledPath& eta, const Quadrature& quad) {
    if (!(t >= 0.0 && t < c.T)) throw InvalidArgument("heat_residual: t outside [0, T)");
    return std::abs(heat_terms(GaussianCylModel(c), t, eta, quad).residual());
}

ItoFunctional classical_ito_functional(const CylindricalFunctional& c, const Quadrature& quad) {
    auto model = std::make_shared<GaussianCylModel>(c);
    ItoFunctional f;
    f.u.label = "classical(" + c.label + ")";
    f.u.evaluator = [model, quad](double t, const SampledPath& e) {
        return classical_solution(*model, std::min(t, model->T()), e, quad).value;
    };
    auto terms = [model, quad](double t, const SampledPath& e) {
        return heat_terms(*model, std::min(t, model->T()), e, quad);
    };
    f.d.dt = [terms](double t, const SampledPath& e) { return terms(t, e).dt; };
    f.d.dh = [terms](double t, const SampledPath& e) { return terms(t, e).dh; };
    f.d.dv = [terms](double t, const SampledPath& e) { return terms(t, e).dv; };
    f.d.dvv = [terms](double t, const SampledPath& e) { return terms(t, e).dvv; };
    return f;
}

double lookback_value(const LookbackState& s, double T) {
    if (!(s.t >= 0.0 && s.t <= T)) throw InvalidArgument("lookback_value: t outside [0, T]");
    const double tau = T - s.t;
    if (tau == 0.0) return std::max(s.m, s.x);
    if (s.x > s.m) return s.x + std::sqrt(2.0 * tau / M_PI);
    const double d = (s.m - s.x) / std::sqrt(tau);
    const double Phi = normal_cdf(d);
    return 2.0 * s.m * (Phi - 0.5) + 2.0 * s.x * (1.0 - Phi) +
           std::sqrt(2.0 * tau / M_PI) * std::exp(-0.5 * d * d);
}

LookbackDerivatives lookback_derivatives(const LookbackState& s, double T) {
    const double tau = T - s.t;
    if (!(tau > 0.0)) throw InvalidArgument("lookback_derivatives: need t < T");
    if (s.x > s.m) throw InvalidArgument("lookback_derivatives: need x <= m");
    const double sq = std::sqrt(tau), d = (s.m - s.x) / sq, ph = normal_pdf(d), Phi = normal_cdf(d);
    return {-ph / sq, 2.0 * (1.0 - Phi), 2.0 * ph / sq, 2.0 * Phi - 1.0};
}

double lookback_U(double t, const SampledPath& eta, double T) {
    if (!(t >= 0.0 && t <= T)) throw InvalidArgument("lookback_U: t outside [0, T]");
    const double a = eta.present_value();
    double m = a;
    if (t > 0.0) m = std::max(m, eta.max_on(-t, 0.0));
    return lookback_value({t, m, a}, T);
}

ReportEntry lookback_pde_check(double T, std::size_t n, double t_max, double tolerance) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            double m = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
            for (std::size_t k = 0; k < n; ++k) {
                double x = m - 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
                auto d = lookback_derivatives({t, m, x}, T);
                worst = std::max(worst, std::abs(d.dt + 0.5 * d.dxx));
            }
        }
    }
    return check_close("lookback.pde_residual", worst, 0.0, tolerance, "closed-form");
}

std::vector<ReportEntry> lookback_fd_check(const LookbackState& s, double T, double tolerance) {
    auto d = lookback_derivatives(s, T);
    auto f = [T](double t, double m, double x) { return lookback_value({t, m, x}, T); };
    const double h = 1e-4;
    double ft = (f(s.t + h, s.m, s.x) - f(s.t - h, s.m, s.x)) / (2 * h);
    double fx = (f(s.t, s.m, s.x + h) - f(s.t, s.m, s.x - h)) / (2 * h);
    double fxx = (f(s.t, s.m, s.x + h) - 2 * f(s.t, s.m, s.x) + f(s.t, s.m, s.x - h)) / (h * h);
    double fm = (f(s.t, s.m + h, s.x) - f(s.t, s.m - h, s.x)) / (2 * h);
    return {check_close("lookback.fd.dt", d.dt, ft, tolerance, "finite-difference"),
            check_close("lookback.fd.dx", d.dx, fx, tolerance, "finite-difference"),
            check_close("lookback.fd.dxx", d.dxx, fxx, 1e3 * tolerance, "finite-difference"),
            check_close("lookback.fd.dm", d.dm, fm, tolerance, "finite-difference")};
}

Expectation mc_price(const PathFunctional& G, double t, const SampledPath& eta, const SimConfig& cfg) {
    cfg.validate();
    Grid grid = past_grid(cfg.T, cfg.n_steps + 1);
    SampledPath start = eta.grid() == grid ? eta : sample_path(grid, [&](double x) { return eta.past_value(x); },
                                                               eta.present_value());
    std::vector<double> vals(cfg.n_paths);
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        auto fs = sample_flow(t, start, cfg.T, grid, cfg.seed, i);
        vals[i] = G(cfg.T, flow_window(fs, cfg.T, grid));
    });
    auto st = sample_stats(vals);
    return {st.mean, st.standard_error};
}

KsResult reflection_density_check(double t, std::size_t n_samples, std::size_t n_steps, std::uint64_t seed) {
    SimConfig cfg;
    cfg.n_steps = n_steps;
    cfg.n_paths = n_samples;
    cfg.T = t;
    cfg.seed = seed;
    std::vector<double> S(n_samples);
    parallel_for(n_samples, 0, [&](std::size_t i) {
        auto tr = simulate_bm_path(cfg, i);
        S[i] = *std::max_element(tr.values().begin(), tr.values().end());
    });
    std::sort(S.begin(), S.end());
    double D = 0.0;
    const double n = static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        double F = 2.0 * normal_cdf(S[i] / std::sqrt(t)) - 1.0;
        D = std::max({D, std::abs(F - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - F)});
    }
    return {D, 1.358 / std::sqrt(n)};
}

} // namespace pathcalc
