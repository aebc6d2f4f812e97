#pragma once

#include <cstdint>
#include <random>

namespace pathcalc {

/// splitmix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key of substream `stream` under `seed`. Depends only on the pair, never on scheduling.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0) {
    return mix64(mix64(seed ^ mix64(salt)) + mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Standard normal draws from a keyed substream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0)
        : engine_(stream_key(seed, stream, salt)) {}

    double operator()() { return dist_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

} // namespace pathcalc
