#include "pathcalc/regcalc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pathcalc/errors.hpp"

namespace pathcalc {

EpsilonSchedule EpsilonSchedule::geometric(double eps0, std::size_t levels, double ratio,
                                           bool grid_refine) {
    if (!(eps0 > 0.0) || levels == 0 || !(ratio > 0.0 && ratio < 1.0))
        throw InvalidArgument("EpsilonSchedule::geometric: bad parameters");
    EpsilonSchedule s;
    s.grid_refine = grid_refine;
    double e = eps0;
    for (std::size_t i = 0; i < levels; ++i, e *= ratio) s.eps_values.push_back(e);
    return s;
}

void EpsilonSchedule::validate() const {
    if (eps_values.empty()) throw InvalidArgument("EpsilonSchedule: empty");
    for (std::size_t i = 0; i < eps_values.size(); ++i) {
        if (!(eps_values[i] > 0.0) || !std::isfinite(eps_values[i]))
            throw InvalidArgument("EpsilonSchedule: levels must be positive");
        if (i > 0 && !(eps_values[i] < eps_values[i - 1]))
            throw InvalidArgument("EpsilonSchedule: levels must decrease strictly");
    }
}

void EpsilonSchedule::validate_for(const Grid& grid) const {
    validate();
    if (!grid_refine && eps_values.back() < 2.0 * grid.spacing() * (1.0 - 1e-12))
        throw InvalidArgument("EpsilonSchedule: finest level below twice the grid spacing");
}

LimitEstimate estimate_limit(std::vector<std::pair<double, double>> raw, double tolerance,
                             Extrapolation mode) {
    if (raw.empty()) throw InvalidArgument("estimate_limit: no levels");
    LimitEstimate L;
    L.tolerance = tolerance;
    const std::size_t n = raw.size();
    const double last = raw[n - 1].second;
    L.value = last;
    L.convergence_rate = std::numeric_limits<double>::quiet_NaN();
    L.raw = raw;
    if (n >= 2) {
        double d2 = last - raw[n - 2].second;
        double r = raw[n - 2].first / raw[n - 1].first;
        double p = 1.0;
        if (n >= 3) {
            double d1 = raw[n - 2].second - raw[n - 3].second;
            double r1 = raw[n - 3].first / raw[n - 2].first;
            if (d1 != 0.0 && d2 != 0.0 && (d1 > 0) == (d2 > 0)) {
                double q = std::log(std::abs(d1 / d2)) / std::log(0.5 * (r + r1));
                if (std::isfinite(q)) p = std::clamp(q, 0.5, 4.0);
            }
            L.convergence_rate = p;
        }
        if (mode == Extrapolation::richardson && d2 != 0.0) L.value = last + d2 / (std::pow(r, p) - 1.0);
        L.converged = std::abs(d2) <= tolerance && std::isfinite(L.value);
    }
    return L;
}

namespace {

enum class Side { left, right };

// Path with the extension conventions: left of a per LeftExtension, right of b the present.
struct Extended {
    const SampledPath& p;
    LeftExtension left;
    double a, b, snap;

    Extended(const SampledPath& path, LeftExtension l)
        : p(path), left(l), a(path.grid().t_min()), b(path.grid().t_max()),
          snap(1e-12 * path.grid().length()) {}

    double operator()(double x, Side side) const {
        if (std::abs(x - b) <= snap) x = b;
        if (std::abs(x - a) <= snap) x = a;
        if (x < a || (x == a && side == Side::left))
            return left == LeftExtension::zero ? 0.0 : p.values().front();
        if (x > b || (x == b && side == Side::right)) return p.present_value();
        if (x == b) return p.values().back();
        return p.past_value(x);
    }
};

void check_same_interval(const Grid& x, const Grid& y, const char* who) {
    double tol = 1e-12 * std::max(x.length(), y.length());
    if (std::abs(x.t_min() - y.t_min()) > tol || std::abs(x.t_max() - y.t_max()) > tol)
        throw InvalidArgument(std::string(who) + ": paths live on different intervals");
}

// Sorted breakpoints: nodes of the given grids shifted by each offset, plus extras,
// clipped to [lo, hi].
std::vector<double> breakpoints(const std::vector<const Grid*>& grids, const std::vector<double>& shifts,
                                const std::vector<double>& extras, double lo, double hi) {
    std::vector<double> pts{lo, hi};
    for (const Grid* g : grids) {
        for (double s : shifts) {
            for (std::size_t i = 0; i < g->n_points(); ++i) {
                double x = g->point(i) + s;
                if (x > lo && x < hi) pts.push_back(x);
            }
        }
    }
    for (double x : extras)
        if (x > lo && x < hi) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    double snap = 1e-12 * std::max(1.0, hi - lo);
    std::vector<double> out;
    out.reserve(pts.size());
    for (double x : pts)
        if (out.empty() || x - out.back() > snap) out.push_back(x);
    if (out.back() != hi) out.back() = hi;
    return out;
}

// Simpson on every piece; exact for piecewise quadratics between breakpoints.
double piecewise_simpson(const std::vector<double>& pts, const std::function<double(double, Side)>& F) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        double l = pts[k], r = pts[k + 1];
        double m = 0.5 * (l + r);
        total += (r - l) / 6.0 * (F(l, Side::right) + 4.0 * F(m, Side::right) + F(r, Side::left));
    }
    return total;
}

void check_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("regularization level must be positive");
}

} // namespace

double forward_approximant(const SampledPath& g, const SampledPath& f, double eps) {
    check_eps(eps);
    check_same_interval(g.grid(), f.grid(), "forward_integral");
    Extended G(g, LeftExtension::zero), Fx(f, LeftExtension::zero);
    double a = f.grid().t_min(), b = f.grid().t_max();
    auto pts = breakpoints({&g.grid(), &f.grid()}, {0.0, -eps}, {b - eps}, a, b);
    return piecewise_simpson(pts, [&](double s, Side side) {
        return G(s, side) * (Fx(s + eps, side) - Fx(s, side)) / eps;
    });
}

double backward_approximant(const SampledPath& g, const SampledPath& f, double eps, LeftExtension left) {
    check_eps(eps);
    check_same_interval(g.grid(), f.grid(), "backward_integral");
    Extended G(g, LeftExtension::zero), Fx(f, left);
    double a = f.grid().t_min(), b = f.grid().t_max();
    auto pts = breakpoints({&g.grid(), &f.grid()}, {0.0, eps}, {a + eps}, a, b);
    return piecewise_simpson(pts, [&](double s, Side side) {
        return G(s, side) * (Fx(s, side) - Fx(s - eps, side)) / eps;
    });
}

double covariation_approximant(const SampledPath& f, const SampledPath& g, double x, double eps) {
    check_eps(eps);
    check_same_interval(f.grid(), g.grid(), "covariation");
    double a = f.grid().t_min(), b = f.grid().t_max();
    if (!(a <= 0.0 && 0.0 <= b)) throw InvalidArgument("covariation: 0 must lie in the interval");
    if (!(a <= x && x <= b)) throw InvalidArgument("covariation: x outside the interval");
    if (x == 0.0) return 0.0;
    Extended Fx(f, LeftExtension::zero), Gx(g, LeftExtension::zero);
    double lo = std::min(0.0, x), hi = std::max(0.0, x);
    auto pts = breakpoints({&f.grid(), &g.grid()}, {0.0, -eps}, {b - eps}, lo, hi);
    double v = piecewise_simpson(pts, [&](double s, Side side) {
        return (Fx(s + eps, side) - Fx(s, side)) * (Gx(s + eps, side) - Gx(s, side)) / eps;
    });
    return x > 0.0 ? v : -v;
}

namespace {

LimitEstimate sweep(const EpsilonSchedule& sched, double tolerance,
                    const std::function<double(double)>& approximant) {
    std::vector<std::pair<double, double>> raw;
    raw.reserve(sched.eps_values.size());
    for (double e : sched.eps_values) raw.emplace_back(e, approximant(e));
    return estimate_limit(std::move(raw), tolerance, sched.extrapolation);
}

} // namespace

LimitEstimate forward_integral(const SampledPath& g, const SampledPath& f, const EpsilonSchedule& sched,
                               double tolerance) {
    sched.validate_for(f.grid());
    return sweep(sched, tolerance, [&](double e) { return forward_approximant(g, f, e); });
}

LimitEstimate backward_integral(const SampledPath& g, const SampledPath& f, const EpsilonSchedule& sched,
                                double tolerance, LeftExtension left) {
    sched.validate_for(f.grid());
    return sweep(sched, tolerance, [&](double e) { return backward_approximant(g, f, e, left); });
}

LimitEstimate covariation(const SampledPath& f, const SampledPath& g, double x, const EpsilonSchedule& sched,
                          double tolerance) {
    sched.validate_for(f.grid());
    return sweep(sched, tolerance, [&](double e) { return covariation_approximant(f, g, x, e); });
}

double backward_measure_approximant(const AtomicMeasure& mu, const SampledPath& f, double eps,
                                    LeftExtension left) {
    double v = backward_approximant(mu.density, f, eps, left);
    Extended Fx(f, left);
    double a = f.grid().t_min(), b = f.grid().t_max();
    for (auto [loc, mass] : mu.atoms) {
        if (loc < a - 1e-12 || loc > b + 1e-12) throw InvalidArgument("AtomicMeasure: atom outside interval");
        v += mass * (Fx(loc, Side::right) - Fx(loc - eps, Side::right)) / eps;
    }
    return v;
}

LimitEstimate backward_integral_measure(const AtomicMeasure& mu, const SampledPath& f,
                                        const EpsilonSchedule& sched, double tolerance, LeftExtension left) {
    sched.validate_for(f.grid());
    return sweep(sched, tolerance, [&](double e) { return backward_measure_approximant(mu, f, e, left); });
}

double ibp_stieltjes(const SampledPath& g, const SampledPath& f, IbpDirection direction) {
    if (!(g.grid() == f.grid())) throw InvalidArgument("ibp_check: g and f must share a grid");
    const auto& gv = g.values();
    const auto& fv = f.values();
    // Absolutely continuous part on ]a,b[: both piecewise linear, trapezoid is exact.
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < gv.size(); ++k) acc += (gv[k + 1] - gv[k]) * 0.5 * (fv[k] + fv[k + 1]);
    const double fb = f.present_value();
    if (direction == IbpDirection::forward) return gv.back() * fb - (gv.front() * fv.front() + acc);
    const double gb = g.present_value();
    return gb * fb - (acc + fb * (gb - gv.back()));
}

IbpResult ibp_evaluate(const SampledPath& g, const SampledPath& f, IbpDirection direction,
                       const EpsilonSchedule& sched, double tolerance) {
    IbpResult r;
    r.stieltjes = ibp_stieltjes(g, f, direction);
    r.limit = direction == IbpDirection::forward ? forward_integral(g, f, sched, tolerance)
                                                 : backward_integral(g, f, sched, tolerance);
    for (auto [e, v] : r.limit.raw) r.level_gaps.push_back(std::abs(v - r.stieltjes));
    return r;
}

ReportEntry ibp_check(const SampledPath& g, const SampledPath& f, IbpDirection direction,
                      const EpsilonSchedule& sched, double tolerance) {
    auto r = ibp_evaluate(g, f, direction, sched, 1e-6);
    return check_close(direction == IbpDirection::forward ? "ibp.forward" : "ibp.backward", r.limit.value,
                       r.stieltjes, tolerance, "stieltjes");
}

} // namespace pathcalc
