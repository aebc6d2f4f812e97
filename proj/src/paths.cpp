#include "pathcalc/paths.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pathcalc/errors.hpp"
#include "pathcalc/rng.hpp"

namespace pathcalc {

Grid::Grid(double t_min, double t_max, std::size_t n_points)
    : t_min_(t_min), t_max_(t_max), n_points_(n_points) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max))
        throw InvalidArgument("Grid: need finite t_min < t_max");
    if (n_points < 2) throw InvalidArgument("Grid: need at least two points");
}

double Grid::point(std::size_t i) const {
    if (i + 1 == n_points_) return t_max_;
    return t_min_ + static_cast<double>(i) * spacing();
}

std::vector<double> Grid::points() const {
    std::vector<double> x(n_points_);
    for (std::size_t i = 0; i < n_points_; ++i) x[i] = point(i);
    return x;
}

Grid past_grid(double T, std::size_t n_points) { return Grid(-T, 0.0, n_points); }

SampledPath::SampledPath(Grid grid, std::vector<double> values, std::optional<double> present)
    : grid_(grid), values_(std::move(values)), present_(present) {
    if (values_.size() != grid_.n_points())
        throw InvalidArgument("SampledPath: value count does not match grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("SampledPath: non-finite value");
    if (present_ && !std::isfinite(*present_))
        throw InvalidArgument("SampledPath: non-finite present value");
}

double SampledPath::past_value(double x) const {
    if (!std::isfinite(x)) throw InvalidArgument("SampledPath: non-finite query point");
    if (x <= grid_.t_min()) return values_.front();
    if (x >= grid_.t_max()) return values_.back();
    double u = (x - grid_.t_min()) / grid_.spacing();
    auto k = static_cast<std::size_t>(u);
    if (k >= values_.size() - 1) k = values_.size() - 2;
    double w = u - static_cast<double>(k);
    return values_[k] + w * (values_[k + 1] - values_[k]);
}

double SampledPath::sup_norm() const {
    double m = std::abs(present_value());
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SampledPath::max_on(double lo, double hi) const {
    lo = std::max(lo, grid_.t_min());
    hi = std::min(hi, grid_.t_max());
    if (lo > hi) throw InvalidArgument("SampledPath::max_on: empty interval");
    double m = std::max(past_value(lo), past_value(hi));
    double h = grid_.spacing();
    auto first = static_cast<std::size_t>(std::ceil((lo - grid_.t_min()) / h));
    for (std::size_t i = first; i < values_.size(); ++i) {
        double x = grid_.point(i);
        if (x > hi) break;
        m = std::max(m, values_[i]);
    }
    return m;
}

bool SampledPath::operator==(const SampledPath& o) const {
    return grid_ == o.grid_ && values_ == o.values_ && present_value() == o.present_value();
}

Trajectory::Trajectory(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty()) throw InvalidArgument("Trajectory: empty");
    if (times_.size() != values_.size()) throw InvalidArgument("Trajectory: length mismatch");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw InvalidArgument("Trajectory: times not increasing");
}

double Trajectory::at(double s) const {
    if (!std::isfinite(s)) throw InvalidArgument("Trajectory: non-finite time");
    if (s <= times_.front()) return values_.front();
    if (s >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), s);
    auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    double w = (s - times_[k]) / (times_[k + 1] - times_[k]);
    return values_[k] + w * (values_[k + 1] - values_[k]);
}

double value_at(const SampledPath& p, double x) {
    if (!std::isfinite(x)) throw InvalidArgument("value_at: non-finite query point");
    if (x >= p.grid().t_max()) return p.present_value();
    return p.past_value(x);
}

SampledPath window_at(const Trajectory& tr, double t, double T, const Grid& grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("window_at: need t >= 0");
    if (std::abs(grid.t_min() + T) > 1e-12 * std::max(1.0, T) || grid.t_max() != 0.0)
        throw InvalidArgument("window_at: grid must span [-T, 0]");
    std::vector<double> v(grid.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = tr.at(t + grid.point(i));
    return SampledPath(grid, std::move(v));
}

SampledPath shift_past(const SampledPath& p, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("shift_past: eps must be >= 0");
    if (eps == 0.0) return p;
    const auto& g = p.grid();
    std::vector<double> v(g.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = p.past_value(g.point(i) - eps);
    return SampledPath(g, std::move(v), p.present_value());
}

SampledPath advance_past(const SampledPath& p, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("advance_past: eps must be >= 0");
    if (eps == 0.0) return p;
    const auto& g = p.grid();
    std::vector<double> v(g.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = g.point(i) + eps;
        v[i] = x >= g.t_max() ? p.present_value() : p.past_value(x);
    }
    return SampledPath(g, std::move(v), p.present_value());
}

SplitPath split(const SampledPath& p) {
    return SplitPath{SampledPath(p.grid(), p.values()), p.present_value()};
}

SampledPath join(const SampledPath& past, double a) {
    return SampledPath(past.grid(), past.values(), a);
}

SampledPath sample_path(const Grid& grid, const std::function<double(double)>& f,
                        std::optional<double> present) {
    std::vector<double> v(grid.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
    return SampledPath(grid, std::move(v), present);
}

SampledPath load_path_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("load_path_csv: cannot open " + file);
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, v;
        if (!(ss >> x >> v)) {
            if (xs.empty()) continue; // header
            throw InvalidArgument("load_path_csv: malformed line '" + line + "'");
        }
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 2) throw InvalidArgument("load_path_csv: need at least two rows");
    Grid g(xs.front(), xs.back(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(xs[i] - g.point(i)) > 1e-9 * std::max(1.0, g.length()))
            throw InvalidArgument("load_path_csv: grid is not uniform");
    return SampledPath(g, std::move(vs));
}

double integrate_against(const SampledPath& p, const std::function<double(double)>& h, double lo,
                         double hi) {
    // 5-point rule: exact for a linear factor times a cubic.
    static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    if (!(lo <= hi)) throw InvalidArgument("integrate_against: need lo <= hi");
    const auto& g = p.grid();
    lo = std::max(lo, g.t_min());
    hi = std::min(hi, g.t_max());
    if (lo >= hi) return 0.0;
    const double dx = g.spacing();
    auto k0 = static_cast<std::size_t>(std::floor((lo - g.t_min()) / dx));
    double total = 0.0;
    for (std::size_t k = k0; k + 1 < g.n_points(); ++k) {
        double l = std::max(lo, g.point(k)), r = std::min(hi, g.point(k + 1));
        if (g.point(k) >= hi) break;
        if (r <= l) continue;
        double c = 0.5 * (l + r), w = 0.5 * (r - l);
        for (int q = 0; q < 5; ++q) {
            double x = c + w * xg[q];
            total += w * wg[q] * p.past_value(x) * h(x);
        }
    }
    return total;
}

SampledPath brownian_path(const Grid& grid, std::uint64_t seed, std::uint64_t stream) {
    NormalStream z(seed, stream, 0x70617468ULL);
    std::vector<double> v(grid.n_points());
    double sd = std::sqrt(grid.spacing());
    v[0] = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + sd * z();
    return SampledPath(grid, std::move(v));
}

namespace {

double parse_param(std::string_view s, double fallback) {
    if (s.empty()) return fallback;
    std::string str(s);
    try {
        std::size_t used = 0;
        double v = std::stod(str, &used);
        if (used != str.size()) throw InvalidArgument("bad fixture parameter '" + str + "'");
        return v;
    } catch (const std::logic_error&) {
        throw InvalidArgument("bad fixture parameter '" + str + "'");
    }
}

} // namespace

SampledPath make_fixture(std::string_view desc, const Grid& grid) {
    std::string_view name = desc, arg;
    if (auto p = desc.find(':'); p != std::string_view::npos) {
        name = desc.substr(0, p);
        arg = desc.substr(p + 1);
    } else if (auto q = desc.find('('); q != std::string_view::npos && desc.back() == ')') {
        name = desc.substr(0, q);
        arg = desc.substr(q + 1, desc.size() - q - 2);
    }
    const double a = grid.t_min(), L = grid.length();
    if (name == "constant") {
        double c = parse_param(arg, 1.0);
        return sample_path(grid, [c](double) { return c; });
    }
    if (name == "linear") {
        double s = parse_param(arg, 1.0);
        return sample_path(grid, [s](double x) { return s * x; });
    }
    if (name == "quadratic") return sample_path(grid, [](double x) { return x * x; });
    if (name == "sine") {
        double f = parse_param(arg, 1.5);
        return sample_path(grid, [=](double x) { return std::sin(2.0 * M_PI * f * (x - a) / L); });
    }
    if (name == "gauss-cdf")
        return sample_path(grid, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    if (name == "kinked") {
        double c = a + 0.4 * L;
        return sample_path(grid, [c](double x) { return std::abs(x - c); });
    }
    if (name == "zigzag") {
        return sample_path(grid, [=](double x) {
            double u = 4.0 * (x - a) / L;
            auto k = static_cast<long>(std::floor(u));
            double f = u - static_cast<double>(k);
            return k % 2 == 0 ? f : 1.0 - f;
        });
    }
    if (name == "brownian") {
        auto seed = static_cast<std::uint64_t>(parse_param(arg, 0.0));
        return brownian_path(grid, seed);
    }
    throw InvalidArgument("unknown path fixture '" + std::string(desc) + "'");
}

std::vector<std::string> fixture_names() {
    return {"constant", "linear", "quadratic", "sine", "gauss-cdf", "kinked", "zigzag", "brownian"};
}

} // namespace pathcalc
