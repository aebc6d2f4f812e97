#pragma once

#include <functional>
#include <vector>

namespace pathcalc {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int order);

/// Gauss-Hermite rule for E[h(Z)], Z ~ N(0,1): weights sum to 1.
GaussRule gauss_hermite(int order);

/// Adaptive Simpson quadrature with absolute tolerance tol. The interval is first cut into
/// `panels` equal pieces so that narrow or oscillating integrands are not missed.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int panels = 97, int max_depth = 40);

} // namespace pathcalc
