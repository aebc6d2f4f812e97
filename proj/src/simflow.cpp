#include "pathcalc/simflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/rng.hpp"

namespace pathcalc {

namespace {
constexpr std::uint64_t kBmSalt = 0x626d7061746873ULL;
constexpr std::uint64_t kFlowSalt = 0x666c6f77ULL;
} // namespace

void SimConfig::validate() const {
    if (n_steps < 1) throw InvalidArgument("SimConfig: n_steps must be positive");
    if (n_paths < 1) throw InvalidArgument("SimConfig: n_paths must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("SimConfig: horizon must be positive");
}

Trajectory simulate_bm_path(const SimConfig& cfg, std::size_t index) {
    cfg.validate();
    NormalStream z(cfg.seed, index, kBmSalt);
    const double dt = cfg.T / static_cast<double>(cfg.n_steps), sd = std::sqrt(dt);
    std::vector<double> t(cfg.n_steps + 1), w(cfg.n_steps + 1);
    for (std::size_t k = 0; k <= cfg.n_steps; ++k) t[k] = k == cfg.n_steps ? cfg.T : dt * static_cast<double>(k);
    w[0] = 0.0;
    for (std::size_t k = 1; k <= cfg.n_steps; ++k) w[k] = w[k - 1] + sd * z();
    return Trajectory(std::move(t), std::move(w));
}

std::vector<Trajectory> simulate_bm(const SimConfig& cfg) {
    cfg.validate();
    std::vector<std::optional<Trajectory>> slots(cfg.n_paths);
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) { slots[i] = simulate_bm_path(cfg, i); });
    std::vector<Trajectory> out;
    out.reserve(cfg.n_paths);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

SampledPath to_sampled(const Trajectory& tr) {
    if (tr.size() < 2) throw InvalidArgument("to_sampled: need at least two points");
    Grid g(tr.times().front(), tr.times().back(), tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (std::abs(tr.times()[i] - g.point(i)) > 1e-9 * g.length())
            throw InvalidArgument("to_sampled: trajectory is not uniformly timed");
    return SampledPath(g, tr.values());
}

FlowSample sample_flow(double t, const SampledPath& eta, double T, const Grid& grid, std::uint64_t seed,
                       std::size_t index) {
    if (!(t >= 0.0 && t <= T)) throw InvalidArgument("sample_flow: t outside [0, T]");
    NormalStream z(seed, index, kFlowSalt);
    std::vector<double> times{t}, w{0.0};
    times.reserve(grid.n_points() + 1);
    w.reserve(grid.n_points() + 1);
    std::size_t first = grid.n_points();
    for (std::size_t j = 0; j < grid.n_points(); ++j) {
        double s = grid.point(j) + T;
        if (s > t + 1e-14 * T) {
            if (first == grid.n_points()) first = j;
            double dt = s - times.back();
            times.push_back(s);
            w.push_back(w.back() + std::sqrt(dt) * z());
        }
    }
    if (times.size() == 1) { // t == T: degenerate base
        times.push_back(T + 1.0);
        w.push_back(0.0);
    }
    return FlowSample{t, T, eta, Trajectory(std::move(times), std::move(w)), grid, first};
}

SampledPath flow_window(const FlowSample& fs, double s, const Grid& grid) {
    if (!(s >= fs.t - 1e-14 && s <= fs.T + 1e-14)) throw InvalidArgument("flow_window: s outside [t, T]");
    if (s == fs.t && grid == fs.eta.grid()) return fs.eta;
    const double cut = fs.t - s, a = fs.eta.present_value();
    std::vector<double> v(grid.n_points());
    if (s == fs.T && grid == fs.grid) {
        // Increments were drawn on these nodes: read them directly.
        const auto& w = fs.base.values();
        for (std::size_t j = 0; j < v.size(); ++j) {
            double x = grid.point(j);
            v[j] = j >= fs.first_node ? a + w[j - fs.first_node + 1]
                   : x == cut         ? a
                                      : fs.eta.past_value(x + s - fs.t);
        }
        return SampledPath(grid, std::move(v), s == fs.t ? std::optional<double>(a) : std::nullopt);
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
        double x = grid.point(j);
        if (x < cut)
            v[j] = fs.eta.past_value(x + s - fs.t);
        else if (x == cut)
            v[j] = a;
        else
            v[j] = a + fs.base.at(x + s);
    }
    std::optional<double> present;
    if (s == fs.t) present = a;
    return SampledPath(grid, std::move(v), present);
}

ItoFunctional ito_functional(std::string_view label) {
    ItoFunctional f;
    f.u = make_functional(label);
    auto zero = [](double, const SampledPath&) { return 0.0; };
    f.d.dt = zero;
    f.d.dh = zero;
    if (label == "present") {
        f.d.dv = [](double, const SampledPath&) { return 1.0; };
        f.d.dvv = zero;
    } else if (label == "present-squared") {
        f.d.dv = [](double, const SampledPath& e) { return 2.0 * e.present_value(); };
        f.d.dvv = [](double, const SampledPath&) { return 2.0; };
    } else {
        throw InvalidArgument("no closed-form Ito derivatives for '" + std::string(label) + "'");
    }
    return f;
}

ItoFunctional ito_markov(std::string label, std::function<double(double, double)> F,
                         std::function<double(double, double)> Ft, std::function<double(double, double)> Fx,
                         std::function<double(double, double)> Fxx) {
    ItoFunctional f;
    f.u.label = std::move(label);
    f.u.evaluator = [F](double t, const SampledPath& e) { return F(t, e.present_value()); };
    f.d.dt = [Ft](double t, const SampledPath& e) { return Ft(t, e.present_value()); };
    f.d.dh = [](double, const SampledPath&) { return 0.0; };
    f.d.dv = [Fx](double t, const SampledPath& e) { return Fx(t, e.present_value()); };
    f.d.dvv = [Fxx](double t, const SampledPath& e) { return Fxx(t, e.present_value()); };
    return f;
}

ItoFunctional ito_numerical(PathFunctional u) {
    ItoFunctional f;
    f.u = u;
    auto bad = std::make_shared<std::size_t>(0);
    f.d.nonconverged = bad;
    f.d.dt = [u, bad](double t, const SampledPath& e) {
        double h = 1e-4;
        double lo = std::max(0.0, t - h);
        return (u(t + h, e) - u(lo, e)) / (t + h - lo);
    };
    f.d.dh = [u, bad](double t, const SampledPath& e) {
        auto L = horizontal_derivative(u, t, e, default_horizontal_schedule(e.grid()), 1e-4);
        if (!L.converged) ++*bad;
        return L.value;
    };
    f.d.dv = [u, bad](double t, const SampledPath& e) {
        auto [dv, dvv] = vertical_derivatives(u, t, e, default_vertical_schedule(e.present_value()), 1e-4);
        if (!dv.converged) ++*bad;
        return dv.value;
    };
    f.d.dvv = [u, bad](double t, const SampledPath& e) {
        auto [dv, dvv] = vertical_derivatives(u, t, e, default_vertical_schedule(e.present_value()), 1e-4);
        if (!dvv.converged) ++*bad;
        return dvv.value;
    };
    return f;
}

ItoResidual ito_verify(const ItoFunctional& u, const Trajectory& X, double eps, const Grid& grid) {
    if (!(eps > 0.0)) throw InvalidArgument("ito_verify: eps must be positive");
    const auto& ts = X.times();
    const std::size_t n = ts.size();
    if (n < 2) throw InvalidArgument("ito_verify: trajectory too short");
    const double T = -grid.t_min();
    const double dt = (ts.back() - ts.front()) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(ts[k] - (ts.front() + dt * static_cast<double>(k))) > 1e-9 * dt * static_cast<double>(n))
            throw InvalidArgument("ito_verify: trajectory must be uniformly timed");
    const std::size_t before = u.d.nonconverged ? *u.d.nonconverged : 0;

    ItoResidual r;
    r.times = ts;
    r.lhs.resize(n);
    r.drift_term.assign(n, 0.0);
    r.horizontal_term.assign(n, 0.0);
    r.forward_term.assign(n, 0.0);
    r.qv_term.assign(n, 0.0);
    r.residual.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = ts[k];
        SampledPath w = window_at(X, s, T, grid);
        r.lhs[k] = u.u(s, w);
        if (k + 1 == n) break;
        const double inc = X.at(s + eps) - X.values()[k];
        const double dtk = ts[k + 1] - s;
        r.drift_term[k + 1] = r.drift_term[k] + u.d.dt(s, w) * dtk;
        r.horizontal_term[k + 1] = r.horizontal_term[k] + u.d.dh(s, w) * dtk;
        r.forward_term[k + 1] = r.forward_term[k] + u.d.dv(s, w) * inc / eps * dtk;
        r.qv_term[k + 1] = r.qv_term[k] + 0.5 * u.d.dvv(s, w) * inc * inc / eps * dtk;
    }
    r.sup_residual = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        r.residual[k] = r.lhs[k] - (r.lhs[0] + r.drift_term[k] + r.horizontal_term[k] + r.forward_term[k] + r.qv_term[k]);
        r.sup_residual = std::max(r.sup_residual, std::abs(r.residual[k]));
    }
    r.nonconverged = u.d.nonconverged ? *u.d.nonconverged - before : 0;
    return r;
}

ReportEntry martingale_check(const Eigen::MatrixXd& values, double k, std::string name) {
    const auto P = values.rows(), M = values.cols();
    if (P < 2 || M < 2) throw InvalidArgument("martingale_check: need two paths and two times");
    if (!values.allFinite()) throw InvalidArgument("martingale_check: non-finite values");
    std::vector<Eigen::Index> cols;
    const Eigen::Index m = std::min<Eigen::Index>(M, 16);
    for (Eigen::Index i = 0; i < m; ++i) cols.push_back(i * (M - 1) / (m - 1));
    double worst = 0.0;
    std::vector<double> d(static_cast<std::size_t>(P));
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a + 1; b < cols.size(); ++b) {
            for (Eigen::Index p = 0; p < P; ++p) d[static_cast<std::size_t>(p)] = values(p, cols[b]) - values(p, cols[a]);
            auto st = sample_stats(d);
            double z;
            if (st.standard_error > 0.0)
                z = std::abs(st.mean) / st.standard_error;
            else
                z = st.mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            worst = std::max(worst, z);
        }
    }
    return check_at_most(std::move(name), worst, 0.0, k, "normalized-drift");
}

} // namespace pathcalc
