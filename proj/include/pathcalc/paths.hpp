#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pathcalc {

/// Uniform grid on [t_min, t_max].
class Grid {
public:
    Grid() = default;
    Grid(double t_min, double t_max, std::size_t n_points);

    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    std::size_t n_points() const { return n_points_; }
    double spacing() const { return (t_max_ - t_min_) / static_cast<double>(n_points_ - 1); }
    double length() const { return t_max_ - t_min_; }
    double point(std::size_t i) const;
    std::vector<double> points() const;

    bool operator==(const Grid&) const = default;

private:
    double t_min_ = -1.0;
    double t_max_ = 0.0;
    std::size_t n_points_ = 2;
};

/// Grid on [-T, 0].
Grid past_grid(double T, std::size_t n_points);

/// A function on a uniform grid, linearly interpolated, with an optional present value
/// at the right end. Without a present value the path is continuous; with one it may
/// jump at the right end.
class SampledPath {
public:
    SampledPath(Grid grid, std::vector<double> values, std::optional<double> present = std::nullopt);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::optional<double>& present() const { return present_; }
    double present_value() const { return present_.value_or(values_.back()); }

    /// Interpolated stored values; constant outside the grid, ignores present.
    double past_value(double x) const;
    /// max |values|, including the present value.
    double sup_norm() const;
    /// Maximum over [lo, hi] of the interpolated past, hi clipped to the grid.
    double max_on(double lo, double hi) const;

    /// Equality of grid, stored values and effective present value.
    bool operator==(const SampledPath& o) const;

private:
    Grid grid_;
    std::vector<double> values_;
    std::optional<double> present_;
};

/// Piecewise-linear process on increasing times; constant before the first time and
/// after the last one.
class Trajectory {
public:
    Trajectory(std::vector<double> times, std::vector<double> values);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return times_.size(); }
    double at(double s) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Path value with the extension rules: eta(t_min) to the left, present at and right of t_max.
double value_at(const SampledPath& p, double x);

/// Window of the trajectory at time t sampled on grid: x -> X_{t+x}.
SampledPath window_at(const Trajectory& tr, double t, double T, const Grid& grid);

/// Past shifted right by eps (constant left extension), present kept.
SampledPath shift_past(const SampledPath& p, double eps);

/// Past moved left by eps (values beyond the right end read the present), present kept.
SampledPath advance_past(const SampledPath& p, double eps);

struct SplitPath {
    SampledPath past; // no present value
    double present;
};
SplitPath split(const SampledPath& p);
SampledPath join(const SampledPath& past, double a);

/// Sample f on the grid.
SampledPath sample_path(const Grid& grid, const std::function<double(double)>& f,
                        std::optional<double> present = std::nullopt);

/// Two-column CSV (x, value) on a uniform grid; a header line is allowed.
SampledPath load_path_csv(const std::string& file);

/// Named fixtures: constant[:c], linear[:slope], quadratic, sine[:freq], gauss-cdf, kinked,
/// brownian[:seed] or brownian(seed), zigzag. Unknown names raise InvalidArgument.
SampledPath make_fixture(std::string_view desc, const Grid& grid);
std::vector<std::string> fixture_names();

/// int_lo^hi p(x) h(x) dx over the interpolated past, Gauss-Legendre on every grid cell.
double integrate_against(const SampledPath& p, const std::function<double(double)>& h, double lo,
                         double hi);

/// Brownian sample on the grid started at 0 at the left end.
SampledPath brownian_path(const Grid& grid, std::uint64_t seed, std::uint64_t stream = 0);

} // namespace pathcalc
