#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace pathcalc {

/// Number of workers used when a call passes 0.
unsigned default_workers();
void set_default_workers(unsigned n);

/// Runs body(i) for i in [0, n) over contiguous blocks. Results must be written to
/// per-index slots by the caller; the first exception (lowest block) is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

/// Pairwise summation; the association order depends only on the length.
double pairwise_sum(std::span<const double> v);

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double standard_error = 0.0;
};
SampleStats sample_stats(std::span<const double> v);

} // namespace pathcalc
