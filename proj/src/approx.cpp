#include "pathcalc/approx.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/quadrature.hpp"
#include "pathcalc/rng.hpp"
#include "pathcalc/simflow.hpp"

namespace pathcalc {

namespace {

constexpr std::uint64_t kSvSalt = 0x7376636f6e76ULL;

// Frequency index j and kind of e_i: 0 constant, 1 sine, 2 cosine.
struct Mode {
    int kind;
    double j;
};
Mode mode(std::size_t i) {
    if (i == 0) return {0, 0.0};
    if (i % 2 == 1) return {1, static_cast<double>((i + 1) / 2)};
    return {2, static_cast<double>(i / 2)};
}

double bump(double u) { return u >= 0.0 && u < 1.0 ? std::exp(1.0 / (u * u - 1.0)) : 0.0; }

// Cumulative mass of the unit bump on a fine table, normalized so that the last entry is 1.
struct BumpTable {
    static constexpr std::size_t N = 4096;
    std::vector<double> R;
    double c = 0.0;

    BumpTable() : R(N + 1, 0.0) {
        auto gl = gauss_legendre(10);
        const double h = 1.0 / static_cast<double>(N);
        for (std::size_t k = 0; k < N; ++k) {
            double a = h * static_cast<double>(k), s = 0.0;
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) s += gl.weights[q] * bump(a + 0.5 * h * (gl.nodes[q] + 1.0));
            R[k + 1] = R[k] + 0.5 * h * s;
        }
        c = 1.0 / R[N];
        for (auto& r : R) r *= c;
    }

    double rho(double u) const { return c * bump(u); }

    // Cubic Hermite interpolation with the exact derivative rho.
    double cumulative(double u) const {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const double h = 1.0 / static_cast<double>(N);
        std::size_t k = std::min(N - 1, static_cast<std::size_t>(u / h));
        double a = h * static_cast<double>(k), s = (u - a) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s), h01 = s * s * (3 - 2 * s),
               h11 = s * s * (s - 1);
        return h00 * R[k] + h10 * h * rho(a) + h01 * R[k + 1] + h11 * h * rho(a + h);
    }
};

const BumpTable& bump_table() {
    static const BumpTable table;
    return table;
}

} // namespace

TrigBasis::TrigBasis(double horizon) : T(horizon) {
    if (!(T > 0.0)) throw InvalidArgument("TrigBasis: horizon must be positive");
}

double TrigBasis::e(std::size_t i, double x) const {
    auto [kind, j] = mode(i);
    if (kind == 0) return 1.0 / std::sqrt(T);
    double w = 2.0 * M_PI * j / T, a = std::sqrt(2.0 / T);
    return kind == 1 ? a * std::sin(w * x) : a * std::cos(w * x);
}

double TrigBasis::de(std::size_t i, double x) const {
    auto [kind, j] = mode(i);
    if (kind == 0) return 0.0;
    double w = 2.0 * M_PI * j / T, a = std::sqrt(2.0 / T);
    return kind == 1 ? a * w * std::cos(w * x) : -a * w * std::sin(w * x);
}

double TrigBasis::anti(std::size_t i, double x) const {
    auto [kind, j] = mode(i);
    if (kind == 0) return (x + T) / std::sqrt(T);
    double w = 2.0 * M_PI * j / T, a = std::sqrt(2.0 / T);
    return kind == 1 ? a * (1.0 - std::cos(w * x)) / w : a * std::sin(w * x) / w;
}

double TrigBasis::moment(std::size_t i) const {
    auto [kind, j] = mode(i);
    if (kind == 0) return -std::sqrt(T) / 2.0;
    if (kind == 2) return 0.0;
    return -std::sqrt(2.0 / T) * T / (2.0 * M_PI * j);
}

FejerOperator::FejerOperator(std::size_t order, double T) : n(order), basis(T) {}

double FejerOperator::weight(std::size_t i) const {
    if (i > n) return 0.0;
    return static_cast<double>(n + 1 - i) / static_cast<double>(n + 1);
}

Mollifier::Mollifier(double eps, double T) : eps_(eps), T_(T) {
    if (!(eps > 0.0) || !(T > 0.0) || eps > T) throw InvalidArgument("Mollifier: need 0 < eps <= T");
}

double Mollifier::normalization() { return bump_table().c; }

double Mollifier::phi(double x) const { return bump_table().rho((x + T_) / eps_) / eps_; }

double Mollifier::dphi(double x) const {
    double u = (x + T_) / eps_;
    if (!(u >= 0.0 && u < 1.0)) return 0.0;
    double q = u * u - 1.0;
    return bump_table().rho(u) * (-2.0 * u / (q * q)) / (eps_ * eps_);
}

double Mollifier::anti(double x) const { return bump_table().cumulative((x + T_) / eps_); }

SampledPath lambda_op(const SampledPath& eta) {
    const double T = eta.grid().length();
    const double slope = (eta.present_value() - eta.values().front()) / T;
    return sample_path(eta.grid(), [&](double x) { return slope * x; });
}

FourierCoeffs fourier_coeffs(const SampledPath& eta, std::size_t n) {
    const Grid& g = eta.grid();
    if (std::abs(g.t_max()) > 1e-12 * g.length()) throw InvalidArgument("fourier_coeffs: path must live on [-T, 0]");
    const double T = g.length();
    TrigBasis B(T);
    const auto& v = eta.values();
    const double start = v.front(), jump = eta.present_value() - start;
    auto gl = gauss_legendre(5);
    FourierCoeffs fc;
    fc.stieltjes.resize(static_cast<Eigen::Index>(n + 1));
    fc.l2.resize(static_cast<Eigen::Index>(n + 1));
    fc.x_minus1 = jump / T;
    for (std::size_t i = 0; i <= n; ++i) {
        const double e0 = B.anti(i, 0.0);
        // Atom eta(-T) at the left end; the jump at 0 meets e~_i(0) - e~_i(0) = 0.
        double s = e0 * start;
        for (std::size_t k = 0; k + 1 < g.n_points(); ++k) {
            double a = g.point(k), b = g.point(k + 1), h = b - a, cell = 0.0;
            for (std::size_t q = 0; q < gl.nodes.size(); ++q)
                cell += gl.weights[q] * (e0 - B.anti(i, a + 0.5 * h * (gl.nodes[q] + 1.0)));
            s += (v[k + 1] - v[k]) / h * 0.5 * h * cell;
        }
        const double lam = B.moment(i) * jump;
        fc.stieltjes(static_cast<Eigen::Index>(i)) = s - lam;
        fc.l2(static_cast<Eigen::Index>(i)) =
            integrate_against(eta, [&](double x) { return B.e(i, x); }, -T, 0.0) - lam;
    }
    return fc;
}

SampledPath cesaro_residual(const FejerOperator& op, const SampledPath& eta) {
    if (std::abs(eta.grid().length() - op.basis.T) > 1e-12 * op.basis.T)
        throw InvalidArgument("fejer: path horizon differs from the operator's");
    auto fc = fourier_coeffs(eta, op.n);
    return sample_path(eta.grid(), [&](double x) {
        double s = 0.0;
        for (std::size_t i = 0; i <= op.n; ++i) s += op.weight(i) * fc.stieltjes(static_cast<Eigen::Index>(i)) * op.basis.e(i, x);
        return s;
    });
}

SampledPath fejer_apply(const FejerOperator& op, const SampledPath& eta) {
    SampledPath r = cesaro_residual(op, eta);
    const double slope = (eta.present_value() - eta.values().front()) / op.basis.T;
    std::vector<double> v = r.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += slope * eta.grid().point(k);
    return SampledPath(eta.grid(), std::move(v));
}

double endpoint_functional(const Mollifier& m, const SampledPath& eta) {
    const Grid& g = eta.grid();
    const double T = m.T();
    if (std::abs(g.length() - T) > 1e-12 * T) throw InvalidArgument("endpoint_functional: horizon mismatch");
    const auto& v = eta.values();
    const double end = -T + m.eps();
    double s = v.front();
    for (std::size_t k = 0; k + 1 < g.n_points() && g.point(k) < end; ++k) {
        double a = g.point(k), b = g.point(k + 1);
        double w = adaptive_simpson([&](double x) { return 1.0 - m.anti(x); }, a, std::min(b, end), 1e-14, 4);
        s += (v[k + 1] - v[k]) / (b - a) * w;
    }
    return s;
}

double endpoint_functional_l2(const Mollifier& m, const SampledPath& eta) {
    const double T = m.T();
    return adaptive_simpson([&](double x) { return eta.past_value(x) * m.phi(x); }, -T, -T + m.eps(), 1e-13);
}

SvApproximant build_Gnek(const PathFunctional& G, std::size_t n, double eps, double k, double T,
                         std::size_t grid_points, const Quadrature& quad) {
    if (!G.growth) throw InvalidArgument("build_Gnek: functional '" + G.label + "' has no growth certificate");
    if (!(k > 0.0)) throw InvalidArgument("build_Gnek: k must be positive");
    if (grid_points < 2) throw InvalidArgument("build_Gnek: grid too small");
    auto B = std::make_shared<TrigBasis>(T);
    auto M = std::make_shared<Mollifier>(eps, T);
    FejerOperator op(n, T);

    SvApproximant a;
    a.n = n;
    a.eps = eps;
    a.k = k;
    a.smoothing = 1.0 / (k * k);
    a.quad = quad;
    a.cyl.T = T;
    a.cyl.label = "G_n,eps,k(" + G.label + ")";
    a.cyl.basis.push_back({[M, T](double s) { return M->anti(s - T) / T; },
                           [M, T](double s) { return M->phi(s - T) / T; },
                           [M, T](double s) { return M->dphi(s - T) / T; }});
    for (std::size_t i = 0; i <= n; ++i) {
        const double e0 = B->anti(i, 0.0), ai = B->moment(i);
        a.cyl.basis.push_back({[B, M, T, i, e0, ai](double s) { return e0 - B->anti(i, s - T) - ai * M->anti(s - T); },
                               [B, M, T, i, ai](double s) { return -B->e(i, s - T) - ai * M->phi(s - T); },
                               [B, M, T, i, ai](double s) { return -B->de(i, s - T) - ai * M->dphi(s - T); }});
    }

    Grid grid = past_grid(T, grid_points);
    auto E = std::make_shared<Eigen::MatrixXd>(static_cast<Eigen::Index>(grid_points), static_cast<Eigen::Index>(n + 2));
    for (std::size_t r = 0; r < grid_points; ++r) {
        double x = grid.point(r);
        (*E)(static_cast<Eigen::Index>(r), 0) = x;
        for (std::size_t i = 0; i <= n; ++i)
            (*E)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i + 1)) = op.weight(i) * B->e(i, x);
    }
    a.cyl.outer.value = [G, E, grid, T](const Eigen::VectorXd& y) {
        Eigen::VectorXd p = (*E) * y;
        return G(T, SampledPath(grid, std::vector<double>(p.data(), p.data() + p.size())));
    };
    a.cyl.outer.gradient = [](const Eigen::VectorXd&) -> Eigen::VectorXd {
        throw UnsupportedFunctional("G_n,eps,k: outer function has no closed-form gradient");
    };
    a.cyl.outer.hessian = [](const Eigen::VectorXd&) -> Eigen::MatrixXd {
        throw UnsupportedFunctional("G_n,eps,k: outer function has no closed-form Hessian");
    };

    auto model = std::make_shared<GaussianCylModel>(a.cyl);
    model->set_smoothing(a.smoothing);
    a.functional.label = a.cyl.label;
    a.functional.growth = G.growth;
    a.functional.evaluator = [model, quad, T](double, const SampledPath& eta) {
        return psi_eval(*model, T, cyl_coordinates(model->functional(), T, eta), quad).value;
    };
    return a;
}

Expectation sv_value(const SvApproximant& a, double t, const SampledPath& eta) {
    GaussianCylModel model(a.cyl);
    model.set_smoothing(a.smoothing);
    return classical_solution(model, t, eta, a.quad);
}

std::vector<SvLevel> diagonal_schedule(const std::vector<std::size_t>& orders) {
    std::vector<SvLevel> s;
    for (auto n : orders) {
        if (n == 0) throw InvalidArgument("diagonal_schedule: orders must be positive");
        double d = static_cast<double>(n);
        s.push_back({n, 1.0 / d, d * d});
    }
    return s;
}

SvTable sv_convergence(const PathFunctional& G, double t, const SampledPath& eta,
                       const std::vector<SvLevel>& schedule, const SvOptions& opt) {
    if (schedule.empty()) throw InvalidArgument("sv_convergence: empty schedule");
    if (!G.growth) throw InvalidArgument("sv_convergence: functional '" + G.label + "' has no growth certificate");
    SvTable out;
    if (opt.reference) {
        out.reference = *opt.reference;
    } else {
        SimConfig cfg;
        cfg.n_steps = opt.grid_points - 1;
        cfg.n_paths = opt.ref_paths;
        cfg.T = opt.T;
        cfg.seed = opt.seed;
        cfg.workers = opt.workers;
        out.reference = mc_price(G, t, eta, cfg);
    }
    out.rows.resize(schedule.size());
    parallel_for(schedule.size(), opt.workers, [&](std::size_t j) {
        const auto& L = schedule[j];
        auto q = Quadrature::monte_carlo(opt.samples, stream_key(opt.seed, L.n, kSvSalt));
        auto a = build_Gnek(G, L.n, L.eps, L.k, opt.T, opt.grid_points, q);
        auto v = sv_value(a, t, eta);
        out.rows[j] = {L, v.value, v.standard_error, out.reference.value, std::abs(v.value - out.reference.value)};
    });

    std::vector<double> ns, gaps;
    for (const auto& r : out.rows) {
        out.report.add(note_value("sv.value.n=" + std::to_string(r.level.n), r.value, r.reference, "strong-viscosity",
                                  opt.seed));
        ns.push_back(static_cast<double>(r.level.n));
        gaps.push_back(r.gap);
    }
    out.report.add(note_value("sv.reference", out.reference.value, out.reference.value,
                              opt.reference ? "supplied" : "monte-carlo", opt.seed));
    if (out.rows.size() >= 2) out.report.add(trend_entry("sv.gap_trend", monotone_trend(ns, gaps), opt.seed));
    out.report.add(check_at_most("sv.final_gap", gaps.back(), 0.0, opt.final_tolerance, "strong-viscosity", opt.seed));
    return out;
}

} // namespace pathcalc
