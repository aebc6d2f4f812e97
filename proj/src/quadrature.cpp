#include "pathcalc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include <Eigen/Dense>

#include "pathcalc/errors.hpp"

namespace pathcalc {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the squared first
// eigenvector components times the total mass mu0.
GaussRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const Eigen::Index n = offdiag.size() + 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v * v;
    }
    return r;
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

GaussRule gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("gauss_legendre: order must be positive");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
    Eigen::VectorXd off(order - 1);
    for (int k = 1; k < order; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    auto r = golub_welsch(off, 2.0);
    cache[order] = r;
    return r;
}

GaussRule gauss_hermite(int order) {
    if (order < 1) throw InvalidArgument("gauss_hermite: order must be positive");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
    // Probabilists' Hermite recurrence: off-diagonal sqrt(k).
    Eigen::VectorXd off(order - 1);
    for (int k = 1; k < order; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
    auto r = golub_welsch(off, 1.0);
    // Symmetrize to remove eigen-solver asymmetry in the tails.
    for (int i = 0; i < order / 2; ++i) {
        int j = order - 1 - i;
        double x = 0.5 * (r.nodes[j] - r.nodes[i]);
        double w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = r.weights[j] = w;
    }
    if (order % 2 == 1) r.nodes[order / 2] = 0.0;
    double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
    for (auto& w : r.weights) w /= s;
    cache[order] = r;
    return r;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int panels, int max_depth) {
    if (a == b) return 0.0;
    panels = std::max(1, panels);
    double h = (b - a) / panels;
    double total = 0.0;
    double fl = f(a);
    for (int k = 0; k < panels; ++k) {
        double l = a + k * h, r = (k + 1 == panels) ? b : a + (k + 1) * h;
        double fr = f(r), fm = f(0.5 * (l + r));
        double whole = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
        total += simpson_rec(f, l, r, fl, fm, fr, whole, tol / panels, max_depth);
        fl = fr;
    }
    return total;
}

} // namespace pathcalc
