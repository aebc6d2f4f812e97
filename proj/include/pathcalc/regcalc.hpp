#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pathcalc/paths.hpp"
#include "pathcalc/report.hpp"

namespace pathcalc {

enum class Extrapolation { richardson, none };

/// Decreasing sequence of regularization levels.
struct EpsilonSchedule {
    std::vector<double> eps_values;
    bool grid_refine = false;
    Extrapolation extrapolation = Extrapolation::richardson;

    static EpsilonSchedule geometric(double eps0, std::size_t levels, double ratio = 0.5,
                                     bool grid_refine = false);
    void validate() const;
    /// Also checks the finest level against 2 * grid spacing unless grid_refine is set.
    void validate_for(const Grid& grid) const;
};

/// Numerical limit of a regularized family. Non-convergence is reported, not thrown.
struct LimitEstimate {
    double value = 0.0;
    std::vector<std::pair<double, double>> raw; // (eps, approximant), eps decreasing
    double convergence_rate = 0.0;
    bool converged = false;
    double tolerance = 0.0;

    double finest() const { return raw.back().second; }
};

/// Builds an estimate from raw levels: Richardson extrapolation on the two finest levels
/// with the order observed on the three finest (first order when not observable).
LimitEstimate estimate_limit(std::vector<std::pair<double, double>> raw, double tolerance,
                             Extrapolation mode = Extrapolation::richardson);

/// Value used left of the grid by backward quotients: 0 (the default convention for the
/// regularization integrals) or the first grid value.
enum class LeftExtension { zero, constant };

/// int_a^b g(s) (f(s+eps) - f(s)) / eps ds with f = f(b) right of b.
double forward_approximant(const SampledPath& g, const SampledPath& f, double eps);
/// int_a^b g(s) (f(s) - f(s-eps)) / eps ds with f extended left of a per `left`.
double backward_approximant(const SampledPath& g, const SampledPath& f, double eps,
                            LeftExtension left = LeftExtension::zero);
/// (1/eps) int_0^x (f(s+eps) - f(s)) (g(s+eps) - g(s)) ds, signed when x < 0.
double covariation_approximant(const SampledPath& f, const SampledPath& g, double x, double eps);

LimitEstimate forward_integral(const SampledPath& g, const SampledPath& f,
                               const EpsilonSchedule& sched, double tolerance = 1e-6);
LimitEstimate backward_integral(const SampledPath& g, const SampledPath& f,
                                const EpsilonSchedule& sched, double tolerance = 1e-6,
                                LeftExtension left = LeftExtension::zero);
LimitEstimate covariation(const SampledPath& f, const SampledPath& g, double x,
                          const EpsilonSchedule& sched, double tolerance = 1e-6);

/// Density part (piecewise linear on its grid, present ignored) plus point masses.
struct AtomicMeasure {
    SampledPath density;
    std::vector<std::pair<double, double>> atoms; // (location, mass)
};

double backward_measure_approximant(const AtomicMeasure& mu, const SampledPath& f, double eps,
                                    LeftExtension left = LeftExtension::zero);
LimitEstimate backward_integral_measure(const AtomicMeasure& mu, const SampledPath& f,
                                        const EpsilonSchedule& sched, double tolerance = 1e-6,
                                        LeftExtension left = LeftExtension::zero);

enum class IbpDirection { forward, backward };

/// Stieltjes side of the integration by parts identity.
/// forward:  g(b-) f(b) - int_[a,b[ f dg, where dg carries an atom g(a) at a;
/// backward: g(b) f(b) - int_]a,b] f dg.
double ibp_stieltjes(const SampledPath& g, const SampledPath& f, IbpDirection direction);

struct IbpResult {
    LimitEstimate limit;
    double stieltjes = 0.0;
    std::vector<double> level_gaps; // |approximant - stieltjes| per level
};
IbpResult ibp_evaluate(const SampledPath& g, const SampledPath& f, IbpDirection direction,
                       const EpsilonSchedule& sched, double tolerance = 1e-6);
/// Entry comparing the extrapolated limit with the Stieltjes side.
ReportEntry ibp_check(const SampledPath& g, const SampledPath& f, IbpDirection direction,
                      const EpsilonSchedule& sched, double tolerance = 1e-3);

} // namespace pathcalc
