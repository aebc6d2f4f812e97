#include "pathcalc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace pathcalc {

namespace {
std::atomic<unsigned> g_workers{1};
}

unsigned default_workers() { return g_workers.load(); }

void set_default_workers(unsigned n) { g_workers.store(std::max(1u, n)); }

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
    if (workers == 0) workers = default_workers();
    std::size_t w = std::min<std::size_t>(workers, n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t b = 0; b < w; ++b) {
        std::size_t lo = n * b / w, hi = n * (b + 1) / w;
        threads.emplace_back([&, b, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[b] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

SampleStats sample_stats(std::span<const double> v) {
    SampleStats s;
    if (v.empty()) return s;
    s.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - s.mean) * (v[i] - s.mean);
        s.variance = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
        s.standard_error = std::sqrt(s.variance / static_cast<double>(v.size()));
    }
    return s;
}

} // namespace pathcalc
