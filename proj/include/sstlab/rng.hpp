#pragma once

#include <cstdint>
#include <random>

namespace sstlab {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-seed for (master seed, stream, chunk). Independent of
/// how chunks are scheduled across workers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t chunk = 0) {
    return mix64(mix64(master + kGoldenGamma * (stream + 1)) ^ mix64(chunk * kGoldenGamma + 0x2545f4914f6cdd1dULL));
}

/// Uniform double on the 2^-53 grid of [0, 1).
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return to_unit(engine_()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace sstlab
