#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathcalc/funcder.hpp"
#include "pathcalc/paths.hpp"
#include "pathcalc/report.hpp"

namespace pathcalc {

struct SimConfig {
    std::size_t n_steps = 1024;
    std::size_t n_paths = 1000;
    double T = 1.0;
    std::uint64_t seed = 0;
    unsigned workers = 0; // 0: default_workers()

    void validate() const;
};

/// Brownian path number `index` on the uniform grid of [0, T]; depends only on (seed, index).
Trajectory simulate_bm_path(const SimConfig& cfg, std::size_t index);
std::vector<Trajectory> simulate_bm(const SimConfig& cfg);

/// Uniformly timed trajectory as a path on [t0, t_end].
SampledPath to_sampled(const Trajectory& tr);

/// One Brownian sample after time t, anchored at the history eta.
struct FlowSample {
    double t = 0.0;
    double T = 1.0;
    SampledPath eta;
    Trajectory base; // s -> W_s - W_t on [t, T]
    Grid grid;               // grid the increments were aligned to
    std::size_t first_node;  // first grid node x with x + T > t
};

/// The Brownian increments are drawn exactly at t and at the times x + T of the grid nodes
/// x > t - T, so the window at s = T is exact on the grid.
FlowSample sample_flow(double t, const SampledPath& eta, double T, const Grid& grid, std::uint64_t seed,
                       std::size_t index);

/// W^{t,eta}_s(x) = eta(x + s - t) for x <= t - s, eta(0) + W_{x+s} - W_t otherwise.
SampledPath flow_window(const FlowSample& fs, double s, const Grid& grid);

/// Derivative evaluators (t, window) -> value.
struct ItoDerivatives {
    std::function<double(double, const SampledPath&)> dt, dh, dv, dvv;
    /// Incremented by numerical evaluators whose limit did not converge.
    std::shared_ptr<std::size_t> nonconverged;
};

struct ItoFunctional {
    PathFunctional u;
    ItoDerivatives d;
};

/// Closed-form fixtures: present, present-squared.
ItoFunctional ito_functional(std::string_view label);
/// u(t, eta) = F(t, eta(0)) with its partial derivatives.
ItoFunctional ito_markov(std::string label, std::function<double(double, double)> F,
                         std::function<double(double, double)> Ft, std::function<double(double, double)> Fx,
                         std::function<double(double, double)> Fxx);
/// Derivatives from the finite-difference and regularization evaluators.
ItoFunctional ito_numerical(PathFunctional u);

struct ItoResidual {
    std::vector<double> times;
    std::vector<double> lhs;
    std::vector<double> drift_term;
    std::vector<double> horizontal_term;
    std::vector<double> forward_term;
    std::vector<double> qv_term;
    std::vector<double> residual;
    double sup_residual = 0.0;
    std::size_t nonconverged = 0;
};

/// Pathwise residual of the functional Ito formula at fixed eps. X must be uniformly timed on
/// [0, T]; the window grid spans [-T, 0]. Sums are left-point Riemann sums on X's time grid; the
/// forward integral and the quadratic variation use the same eps.
ItoResidual ito_verify(const ItoFunctional& u, const Trajectory& X, double eps, const Grid& grid);

/// Max over pairs of time columns of |mean(V_s') - mean(V_s)| / SE(V_s' - V_s).
/// values is paths x times; at most 16 evenly spaced columns are compared.
ReportEntry martingale_check(const Eigen::MatrixXd& values, double k = 4.0,
                             std::string name = "martingale");

} // namespace pathcalc
