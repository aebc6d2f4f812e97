#include "pathcalc/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "pathcalc/errors.hpp"
#include "pathcalc/parallel.hpp"
#include "pathcalc/quadrature.hpp"
#include "pathcalc/rng.hpp"

namespace pathcalc {

namespace {

constexpr std::uint64_t kSdeSalt = 0x736465ULL;
constexpr std::uint64_t kLipSalt = 0x6c6970ULL;

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(1.0 / (u * u - 1.0)) : 0.0; }

// Tensor rule for the unit-mass bump on [-1, 1]^d.
struct BumpRule {
    std::vector<Eigen::VectorXd> nodes;
    std::vector<double> weights;
};

std::shared_ptr<const BumpRule> bump_rule(std::size_t d) {
    if (d == 0 || d > 3) throw InvalidArgument("mollify: dimension must be 1, 2 or 3");
    auto gl = gauss_legendre(d == 1 ? 8 : 5);
    const std::size_t m = gl.nodes.size();
    auto rule = std::make_shared<BumpRule>();
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= m;
    double sum = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        Eigen::VectorXd u(static_cast<Eigen::Index>(d));
        double w = 1.0;
        std::size_t f = flat;
        for (std::size_t k = 0; k < d; ++k) {
            std::size_t q = f % m;
            f /= m;
            u(static_cast<Eigen::Index>(k)) = gl.nodes[q];
            w *= gl.weights[q] * bump(gl.nodes[q]);
        }
        rule->nodes.push_back(u);
        rule->weights.push_back(w);
        sum += w;
    }
    for (auto& w : rule->weights) w /= sum;
    return rule;
}

Eigen::VectorXd row(const Eigen::MatrixXd& M, Eigen::Index i) { return M.row(i).transpose(); }

// Least squares on monomials of the standardized state.
class Regression {
public:
    Regression(const Eigen::MatrixXd& X, int degree, std::vector<std::string>& warnings, double t) {
        const auto n = X.rows(), d = X.cols();
        mean_ = X.colwise().mean();
        sd_ = Eigen::VectorXd::Zero(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            double s = std::sqrt((X.col(j).array() - mean_(j)).square().sum() / static_cast<double>(n));
            if (s > 1e-12 * std::max(1.0, std::abs(mean_(j)))) {
                sd_(j) = s;
                active_.push_back(j);
            }
        }
        for (int deg = active_.empty() ? 0 : degree; deg >= 0; --deg) {
            build_exponents(deg);
            Eigen::MatrixXd A = design(X);
            qr_.setThreshold(1e-10);
            qr_.compute(A);
            if (qr_.rank() == A.cols()) {
                if (deg < degree && !active_.empty())
                    warnings.push_back("regression degree lowered to " + std::to_string(deg) + " at t=" + std::to_string(t));
                design_ = std::move(A);
                return;
            }
        }
        throw NumericalDegeneracy("regression: no usable design");
    }

    bool constant() const { return design_.cols() == 1; }

    // Fitted values of E[y | X].
    Eigen::VectorXd fit(const Eigen::VectorXd& y) const {
        if (constant()) {
            std::vector<double> v(y.data(), y.data() + y.size());
            return Eigen::VectorXd::Constant(y.size(), pairwise_sum(v) / static_cast<double>(y.size()));
        }
        return design_ * qr_.solve(y);
    }

private:
    void build_exponents(int deg) {
        exps_.clear();
        std::vector<int> e(active_.size(), 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
            if (j == e.size()) {
                exps_.push_back(e);
                return;
            }
            for (int p = 0; p <= left; ++p) {
                e[j] = p;
                rec(j + 1, left - p);
            }
            e[j] = 0;
        };
        rec(0, deg);
    }

    Eigen::MatrixXd design(const Eigen::MatrixXd& X) const {
        const auto n = X.rows();
        Eigen::MatrixXd A(n, static_cast<Eigen::Index>(exps_.size()));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < exps_.size(); ++c) {
                double v = 1.0;
                for (std::size_t j = 0; j < active_.size(); ++j) {
                    auto col = active_[j];
                    double z = (X(i, col) - mean_(col)) / sd_(col);
                    for (int p = 0; p < exps_[c][j]; ++p) v *= z;
                }
                A(i, static_cast<Eigen::Index>(c)) = v;
            }
        }
        return A;
    }

    Eigen::VectorXd mean_, sd_;
    std::vector<Eigen::Index> active_;
    std::vector<std::vector<int>> exps_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd design_;
};

double mean_of(const Eigen::VectorXd& v) {
    std::vector<double> s(v.data(), v.data() + v.size());
    return pairwise_sum(s) / static_cast<double>(v.size());
}

} // namespace

void SDECoeffs::validate() const {
    if (d == 0 || d > 3) throw InvalidArgument("SDECoeffs: dimension must be 1, 2 or 3");
    if (!b || !sigma) throw InvalidArgument("SDECoeffs: missing drift or diffusion");
    if (!(lipschitz_C >= 0.0) || !std::isfinite(lipschitz_C)) throw InvalidArgument("SDECoeffs: bad Lipschitz certificate");
}

void BSDEProblem::validate() const {
    coeffs.validate();
    if (!f || !g) throw InvalidArgument("BSDEProblem: missing generator or terminal");
    if (!(f_lipschitz >= 0.0) || !std::isfinite(f_lipschitz)) throw InvalidArgument("BSDEProblem: bad generator certificate");
    if (!(g_growth.C >= 0.0) || !std::isfinite(g_growth.C) || !std::isfinite(g_growth.m))
        throw InvalidArgument("BSDEProblem: bad growth certificate");
}

double measured_lipschitz(const SDECoeffs& c, std::size_t pairs, std::uint64_t seed, double R) {
    c.validate();
    NormalStream rng(seed, 0, kLipSalt);
    const auto d = static_cast<Eigen::Index>(c.d);
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        Eigen::VectorXd x(d), y(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            x(j) = R * (2.0 * rng.uniform() - 1.0);
            y(j) = R * (2.0 * rng.uniform() - 1.0);
        }
        double t = rng.uniform(), dist = (x - y).norm();
        if (dist == 0.0) continue;
        double num = (c.b(t, x) - c.b(t, y)).norm() + (c.sigma(t, x) - c.sigma(t, y)).norm();
        worst = std::max(worst, num / dist);
    }
    return worst;
}

ReportEntry lipschitz_spot_check(const SDECoeffs& c, std::size_t pairs, std::uint64_t seed, double R) {
    double worst = measured_lipschitz(c, pairs, seed, R);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.d));
    NormalStream rng(seed, 1, kLipSalt);
    for (int k = 0; k < 16; ++k) {
        double t = rng.uniform();
        worst = std::max(worst, c.b(t, zero).norm() + c.sigma(t, zero).norm());
    }
    return check_at_most("lipschitz." + c.label, worst, c.lipschitz_C, 1e-12, "random-pairs", seed);
}

SdePaths sde_euler(const SDECoeffs& c, double t, const Eigen::VectorXd& x, const SimConfig& cfg) {
    c.validate();
    cfg.validate();
    if (!(t >= 0.0 && t < cfg.T)) throw InvalidArgument("sde_euler: need 0 <= t < T");
    if (static_cast<std::size_t>(x.size()) != c.d) throw InvalidArgument("sde_euler: state dimension mismatch");
    const std::size_t N = cfg.n_steps, P = cfg.n_paths;
    const auto d = static_cast<Eigen::Index>(c.d);
    const auto Pi = static_cast<Eigen::Index>(P);
    const double dt = (cfg.T - t) / static_cast<double>(N), sq = std::sqrt(dt);
    SdePaths out;
    out.times.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) out.times[k] = k == N ? cfg.T : t + dt * static_cast<double>(k);
    out.X.assign(N + 1, Eigen::MatrixXd(Pi, d));
    out.dW.assign(N, Eigen::MatrixXd(Pi, d));
    parallel_for(P, cfg.workers, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        NormalStream z(cfg.seed, i, kSdeSalt);
        Eigen::VectorXd s = x, w(d);
        out.X[0].row(r) = s.transpose();
        for (std::size_t k = 0; k < N; ++k) {
            for (Eigen::Index j = 0; j < d; ++j) w(j) = sq * z();
            s = s + c.b(out.times[k], s) * dt + c.sigma(out.times[k], s) * w;
            if (!s.allFinite()) throw SimulationError("sde_euler: non-finite state at t=" + std::to_string(out.times[k + 1]), i);
            out.dW[k].row(r) = w.transpose();
            out.X[k + 1].row(r) = s.transpose();
        }
    });
    return out;
}

double sup_moment(const SdePaths& paths, double p) {
    if (paths.X.empty()) throw InvalidArgument("sup_moment: no paths");
    const auto P = paths.X[0].rows();
    std::vector<double> v(static_cast<std::size_t>(P), 0.0);
    for (const auto& Xk : paths.X)
        for (Eigen::Index i = 0; i < P; ++i)
            v[static_cast<std::size_t>(i)] = std::max(v[static_cast<std::size_t>(i)], std::pow(Xk.row(i).norm(), p));
    return pairwise_sum(v) / static_cast<double>(P);
}

SDECoeffs mollify_coeffs(const SDECoeffs& raw, std::size_t n) {
    raw.validate();
    if (n == 0) throw InvalidArgument("mollify_coeffs: order must be positive");
    auto rule = bump_rule(raw.d);
    const double h = 1.0 / static_cast<double>(n);
    const auto d = static_cast<Eigen::Index>(raw.d);
    SDECoeffs out;
    out.d = raw.d;
    out.label = raw.label + "@n=" + std::to_string(n);
    // Same Lipschitz constant. At the origin the kernel shifts b and sigma by at most sqrt(d)/n
    // each, and the identity floor adds another sqrt(d)/n.
    out.lipschitz_C = raw.lipschitz_C + (2.0 * raw.lipschitz_C + 1.0) * std::sqrt(static_cast<double>(raw.d)) * h;
    out.b = [b = raw.b, rule, h](double t, const Eigen::VectorXd& x) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
        for (std::size_t q = 0; q < rule->weights.size(); ++q) s += rule->weights[q] * b(t, x - h * rule->nodes[q]);
        return s;
    };
    out.sigma = [sg = raw.sigma, rule, h, d](double t, const Eigen::VectorXd& x) {
        Eigen::MatrixXd s = h * Eigen::MatrixXd::Identity(d, d);
        for (std::size_t q = 0; q < rule->weights.size(); ++q) s += rule->weights[q] * sg(t, x - h * rule->nodes[q]);
        return s;
    };
    return out;
}

Terminal mollify_terminal(const Terminal& g, std::size_t d, std::size_t n) {
    if (n == 0) throw InvalidArgument("mollify_terminal: order must be positive");
    auto rule = bump_rule(d);
    const double h = 1.0 / static_cast<double>(n);
    return [g, rule, h](const Eigen::VectorXd& x) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule->weights.size(); ++q) s += rule->weights[q] * g(x - h * rule->nodes[q]);
        return s;
    };
}

Generator mollify_generator(const Generator& f, std::size_t d, std::size_t n) {
    if (n == 0) throw InvalidArgument("mollify_generator: order must be positive");
    auto rule = bump_rule(d);
    const double h = 1.0 / static_cast<double>(n);
    return [f, rule, h](double t, const Eigen::VectorXd& x, double y, const Eigen::VectorXd& z) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule->weights.size(); ++q) s += rule->weights[q] * f(t, x - h * rule->nodes[q], y, z);
        return s;
    };
}

BSDEProblem mollify_problem(const BSDEProblem& p, std::size_t n) {
    p.validate();
    BSDEProblem out = p;
    out.coeffs = mollify_coeffs(p.coeffs, n);
    out.f = mollify_generator(p.f, p.coeffs.d, n);
    out.g = mollify_terminal(p.g, p.coeffs.d, n);
    out.label = p.label + "@n=" + std::to_string(n);
    return out;
}

ConvergenceTable sde_convergence(const SDECoeffs& raw, double t, const Eigen::VectorXd& x,
                                 const std::vector<std::size_t>& orders, const SimConfig& cfg) {
    if (orders.empty()) throw InvalidArgument("sde_convergence: no orders");
    auto ref = sde_euler(raw, t, x, cfg);
    ConvergenceTable tab;
    tab.orders = orders;
    std::vector<double> ns;
    for (auto n : orders) {
        auto Xn = sde_euler(mollify_coeffs(raw, n), t, x, cfg);
        const auto P = ref.X[0].rows();
        std::vector<double> sup(static_cast<std::size_t>(P), 0.0);
        for (std::size_t k = 0; k < ref.X.size(); ++k)
            for (Eigen::Index i = 0; i < P; ++i)
                sup[static_cast<std::size_t>(i)] =
                    std::max(sup[static_cast<std::size_t>(i)], (Xn.X[k].row(i) - ref.X[k].row(i)).squaredNorm());
        double e = pairwise_sum(sup) / static_cast<double>(P);
        tab.errors.push_back(e);
        ns.push_back(static_cast<double>(n));
        tab.report.add(note_value("sde_convergence." + raw.label + ".n=" + std::to_string(n), e, 0.0, "euler-crn", cfg.seed));
    }
    if (orders.size() >= 2)
        tab.report.add(trend_entry("sde_convergence." + raw.label + ".trend", monotone_trend(ns, tab.errors), cfg.seed));
    return tab;
}

BSDESolution bsde_solve(const BSDEProblem& p, Flavor flavor, double t, const Eigen::VectorXd& x, const SimConfig& cfg,
                        int degree) {
    p.validate();
    if (degree < 0) throw InvalidArgument("bsde_solve: degree must be nonnegative");
    if (flavor != Flavor::exact && !p.k_rate) throw InvalidArgument("bsde_solve: super and sub flavors need a K rate");
    auto paths = sde_euler(p.coeffs, t, x, cfg);
    const std::size_t N = cfg.n_steps;
    const auto P = static_cast<Eigen::Index>(cfg.n_paths);
    const auto d = static_cast<Eigen::Index>(p.coeffs.d);
    const auto Nc = static_cast<Eigen::Index>(N + 1);

    BSDESolution sol;
    sol.flavor = flavor;
    sol.times = paths.times;
    sol.Y = Eigen::MatrixXd::Zero(P, Nc);
    sol.Z.assign(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(P, Nc));
    sol.K = Eigen::MatrixXd::Zero(P, Nc);
    const double sign = flavor == Flavor::super ? 1.0 : flavor == Flavor::sub ? -1.0 : 0.0;

    // Scenario-supplied K increments, forward in time.
    Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(P, static_cast<Eigen::Index>(N));
    if (flavor != Flavor::exact) {
        parallel_for(static_cast<std::size_t>(P), cfg.workers, [&](std::size_t ii) {
            const auto i = static_cast<Eigen::Index>(ii);
            for (std::size_t k = 0; k < N; ++k) {
                double r = p.k_rate(paths.times[k], row(paths.X[k], i));
                if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("bsde_solve: K rate must be finite and nonnegative");
                dK(i, static_cast<Eigen::Index>(k)) = r * (paths.times[k + 1] - paths.times[k]);
            }
        });
        for (std::size_t k = 0; k < N; ++k)
            sol.K.col(static_cast<Eigen::Index>(k + 1)) = sol.K.col(static_cast<Eigen::Index>(k)) + sign * dK.col(static_cast<Eigen::Index>(k));
    }

    parallel_for(static_cast<std::size_t>(P), cfg.workers, [&](std::size_t ii) {
        const auto i = static_cast<Eigen::Index>(ii);
        sol.Y(i, Nc - 1) = p.g(row(paths.X[N], i));
    });

    Eigen::VectorXd target(P);
    for (std::size_t kk = N; kk-- > 0;) {
        const auto k = static_cast<Eigen::Index>(kk);
        const double dt = paths.times[kk + 1] - paths.times[kk];
        Regression reg(paths.X[kk], degree, sol.warnings, paths.times[kk]);
        Eigen::VectorXd next = sol.Y.col(k + 1);
        Eigen::VectorXd resid = next - reg.fit(next);
        for (Eigen::Index j = 0; j < d; ++j)
            sol.Z[static_cast<std::size_t>(j)].col(k) = reg.fit(resid.cwiseProduct(paths.dW[kk].col(j)) / dt);
        parallel_for(static_cast<std::size_t>(P), cfg.workers, [&](std::size_t ii) {
            const auto i = static_cast<Eigen::Index>(ii);
            Eigen::VectorXd z(d);
            for (Eigen::Index j = 0; j < d; ++j) z(j) = sol.Z[static_cast<std::size_t>(j)](i, k);
            target(i) = next(i) + p.f(paths.times[kk], row(paths.X[kk], i), next(i), z) * dt + sign * dK(i, k);
        });
        for (Eigen::Index i = 0; i < P; ++i)
            if (!std::isfinite(target(i)))
                throw SimulationError("bsde_solve: non-finite target at t=" + std::to_string(paths.times[kk]),
                                      static_cast<std::size_t>(i));
        sol.Y.col(k) = reg.fit(target);
        if (kk == 0) {
            std::vector<double> v(target.data(), target.data() + target.size());
            auto st = sample_stats(v);
            sol.y0 = reg.constant() ? st.mean : mean_of(sol.Y.col(0));
            sol.y0_se = st.standard_error;
        }
    }
    sol.X = std::move(paths.X);
    return sol;
}

ValueMap bsde_value_map(const BSDEProblem& p, Flavor flavor, const SimConfig& cfg, int degree) {
    return [p, flavor, cfg, degree](double t, const Eigen::VectorXd& x) {
        auto s = bsde_solve(p, flavor, t, x, cfg, degree);
        return Expectation{s.y0, s.y0_se};
    };
}

ReportEntry comparison_check(const ValueMap& sub, const ValueMap& super, const std::vector<SamplePoint>& points,
                             std::string name, double k) {
    if (points.empty()) throw InvalidArgument("comparison_check: no sample points");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& pt : points) {
        auto a = sub(pt.t, pt.x), b = super(pt.t, pt.x);
        double se = std::hypot(a.standard_error, b.standard_error);
        worst = std::min(worst, b.value - a.value + k * se);
    }
    return check_at_least(std::move(name), worst, 0.0, 0.0, "comparison");
}

AprioriResult apriori_check(const BSDESolution& sol, const BSDEProblem& p) {
    const auto P = sol.Y.rows();
    const std::size_t N = sol.times.size() - 1;
    const double T = sol.times.back() - sol.times.front();
    const auto d = static_cast<Eigen::Index>(sol.Z.size());
    double z2 = 0.0, k2 = 0.0, y2 = 0.0, f2 = 0.0;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    std::vector<double> buf(static_cast<std::size_t>(P));
    for (std::size_t kk = 0; kk <= N; ++kk) {
        const auto k = static_cast<Eigen::Index>(kk);
        y2 = std::max(y2, sol.Y.col(k).squaredNorm() / static_cast<double>(P));
        k2 = std::max(k2, sol.K.col(k).squaredNorm() / static_cast<double>(P));
        if (kk == N) break;
        const double dt = sol.times[kk + 1] - sol.times[kk];
        double zs = 0.0;
        for (const auto& Zj : sol.Z) zs += Zj.col(k).squaredNorm();
        z2 += zs / static_cast<double>(P) * dt;
        for (Eigen::Index i = 0; i < P; ++i) {
            double v = p.f(sol.times[kk], row(sol.X[kk], i), 0.0, zero);
            buf[static_cast<std::size_t>(i)] = v * v;
        }
        f2 += pairwise_sum(buf) / static_cast<double>(P) * dt;
    }
    AprioriResult r;
    r.lhs = z2 + k2;
    r.rhs = y2 + f2;
    r.constant = r.rhs > 0.0 ? r.lhs / ((1.0 + T * T * T) * r.rhs) : 0.0;
    return r;
}

ReportEntry apriori_stability(const std::vector<double>& constants, double factor, std::string name) {
    if (constants.empty()) throw InvalidArgument("apriori_stability: no constants");
    auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
    double ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    return check_at_most(std::move(name), ratio, factor, 0.0, "implied-constant");
}

ConvergenceTable limit_diagnostic(const BSDEProblem& raw, double t, const Eigen::VectorXd& x,
                                  const std::vector<std::size_t>& orders, std::size_t reference_order, double q,
                                  const SimConfig& cfg, int degree) {
    if (!(q >= 1.0 && q < 2.0)) throw InvalidArgument("limit_diagnostic: q must lie in [1, 2)");
    if (orders.empty()) throw InvalidArgument("limit_diagnostic: no orders");
    auto ref = bsde_solve(mollify_problem(raw, reference_order), Flavor::exact, t, x, cfg, degree);
    const auto P = ref.Y.rows();
    const std::size_t N = ref.times.size() - 1;
    ConvergenceTable tab;
    tab.orders = orders;
    std::vector<double> ns;
    std::vector<double> buf(static_cast<std::size_t>(P));
    for (auto n : orders) {
        auto s = bsde_solve(mollify_problem(raw, n), Flavor::exact, t, x, cfg, degree);
        double e = 0.0;
        for (std::size_t kk = 0; kk < N; ++kk) {
            const auto k = static_cast<Eigen::Index>(kk);
            for (Eigen::Index i = 0; i < P; ++i) {
                double sq = 0.0;
                for (std::size_t j = 0; j < s.Z.size(); ++j) sq += std::pow(s.Z[j](i, k) - ref.Z[j](i, k), 2);
                buf[static_cast<std::size_t>(i)] = std::pow(sq, q / 2.0);
            }
            e += pairwise_sum(buf) / static_cast<double>(P) * (ref.times[kk + 1] - ref.times[kk]);
        }
        tab.errors.push_back(e);
        ns.push_back(static_cast<double>(n));
        tab.report.add(note_value("limit." + raw.label + ".q=" + std::to_string(q).substr(0, 4) + ".n=" + std::to_string(n),
                                  e, 0.0, "crn-reference", cfg.seed));
    }
    if (orders.size() >= 2)
        tab.report.add(trend_entry("limit." + raw.label + ".q=" + std::to_string(q).substr(0, 4) + ".trend",
                                   monotone_trend(ns, tab.errors, 0.10, 1e-12), cfg.seed));
    return tab;
}

} // namespace pathcalc
