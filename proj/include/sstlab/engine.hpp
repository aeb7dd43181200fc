#pragma once

// Shared sampling driver for the estimators: runs a per-unit kernel over
// Monte-Carlo draws or orbit points and accumulates vector-valued moments.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sstlab/correlations.hpp"
#include "sstlab/parallel.hpp"

namespace sstlab {

inline std::int64_t method_budget(const Method& method) {
    if (const auto* mc = std::get_if<MonteCarlo>(&method)) return mc->samples;
    return std::get<OrbitAverage>(method).length;
}

inline void check_method(const SystemSpec& sys, const Method& method) {
    if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
        if (mc->samples < 1) throw std::invalid_argument("Monte-Carlo budget must be >= 1");
        return;
    }
    const auto& orbit = std::get<OrbitAverage>(method);
    if (orbit.length < 1) throw std::invalid_argument("orbit length must be >= 1");
    if (!is_uniquely_ergodic(sys))
        throw std::invalid_argument("orbit averages need a uniquely ergodic system, got " + describe(sys));
    check_point(sys, orbit.start);
}

/// Samples per batch for the variance estimate: a power of two up to 16,
/// chosen from the budget alone so results do not depend on scheduling.
inline std::int64_t batch_size(std::int64_t total) {
    std::int64_t b = 1;
    while (b < 16 && 2 * b * 256 <= total) b *= 2;
    return b;
}

/// Calls kernel(x, rng, out) once per sample unit, where x is an invariant
/// draw (Monte Carlo) or T^t start (orbit). The kernel adds the unit's
/// statistics to out (length `dim`); each entry may be touched at most once.
template <class Kernel>
VectorMoments estimate_units(const SystemSpec& sys, const Method& method, std::size_t dim, std::uint64_t stream,
                             Kernel&& kernel) {
    check_method(sys, method);
    const auto* mc = std::get_if<MonteCarlo>(&method);
    const auto* orbit = std::get_if<OrbitAverage>(&method);
    const std::uint64_t seed = mc ? mc->seed : 0x6f72626974ULL;
    const std::int64_t total = method_budget(method);
    const std::int64_t batch = batch_size(total);

    return reduce_chunks(
        total, kChunkSize, VectorMoments(dim),
        [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
            Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(chunk)));
            VectorMoments acc(dim);
            std::vector<Complex> sums(dim);
            for (std::int64_t first = begin; first < end; first += batch) {
                const std::int64_t last = std::min(end, first + batch);
                std::fill(sums.begin(), sums.end(), Complex{});
                for (std::int64_t u = first; u < last; ++u) {
                    const Point x = mc ? sample_invariant(sys, rng) : iterate_pow(sys, orbit->start, u);
                    kernel(x, rng, sums.data());
                }
                acc.add_batch(sums.data(), last - first);
            }
            return acc;
        },
        [](VectorMoments& acc, const VectorMoments& v) { acc.merge(v); });
}

inline CorrelationEstimate to_estimate(const ComplexMoments& m, const Method& method) {
    CorrelationEstimate e;
    e.value = m.mean();
    e.std_error = m.stderr_of_mean();
    e.budget = m.count;
    e.method = method;
    return e;
}

/// Observable values along an orbit, evaluated at T^m x.
class OrbitProbe {
public:
    OrbitProbe(const SystemSpec& sys, const Point& x) : sys_(sys), x_(x) {}

    Complex at(const Observable& f, std::int64_t m) {
        coords_.clear();
        if (m == 0) {
            coordinates(sys_, x_, coords_);
        } else {
            coordinates(sys_, iterate_pow(sys_, x_, m), coords_);
        }
        return evaluate(f, coords_);
    }

    /// Coordinates of T^m x, for evaluating several observables at once.
    const Coords& coords_at(std::int64_t m) {
        coords_.clear();
        if (m == 0) {
            coordinates(sys_, x_, coords_);
        } else {
            coordinates(sys_, iterate_pow(sys_, x_, m), coords_);
        }
        return coords_;
    }

private:
    const SystemSpec& sys_;
    const Point& x_;
    Coords coords_;
};

}  // namespace sstlab
