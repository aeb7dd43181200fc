#pragma once

// Estimators for multicorrelations ∫ f0 · T^n f1 ⋯ T^{kn} fk dμ, their Cesàro
// averages, strong-stationarity scans, spectral masses and recurrence, plus
// the finitary Van der Corput inequality.
//
// Every estimator is a pure function of (system, observables, method): Monte
// Carlo draws come from per-chunk generators derived from the seed and
// partial sums are merged in chunk order.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sstlab/dynamics.hpp"
#include "sstlab/stats.hpp"

namespace sstlab {

/// Average over `samples` independent draws from the invariant measure.
struct MonteCarlo {
    std::uint64_t seed = 0;
    std::int64_t samples = 0;
};

/// Average over start, T start, ..., T^{length-1} start. Only valid as a
/// space average for uniquely ergodic systems; other systems are rejected.
struct OrbitAverage {
    Point start;
    std::int64_t length = 0;
};

struct Method : std::variant<MonteCarlo, OrbitAverage> {
    using variant::variant;
};

struct CorrelationEstimate {
    Complex value;
    double std_error = 0.0;    // sample standard deviation / sqrt(budget)
    std::int64_t budget = 0;   // number of independent units averaged
    Method method = MonteCarlo{};
};

CorrelationEstimate multicorrelation(const SystemSpec& sys, std::span<const Observable> fs, std::int64_t n,
                                     const Method& method);

struct TracePoint {
    std::int64_t checkpoint = 0;
    Complex value;
    double std_error = 0.0;
};

/// Cesàro options. Each sample unit averages the product over `draws`
/// values of n, one per stratum of {1..N}; draws = 0 (or >= N) uses every n.
struct CesaroOptions {
    std::int64_t N = 1;
    std::int64_t step = 1;
    std::int64_t draws = 0;
};

struct CesaroEstimate {
    CorrelationEstimate estimate;
    std::vector<TracePoint> trace;  // partial averages at N/4, N/2, N
};

/// (1/N) sum_{n=1..N} ∫ f0 · T^{step n} f1 ⋯ T^{k step n} fk dμ.
CesaroEstimate cesaro_average(const SystemSpec& sys, std::span<const Observable> fs, const CesaroOptions& opts,
                              const Method& method);

/// Cesàro averages for several steps on shared samples, with the paired
/// differences (steps[i] versus steps[0]) for i >= 1.
struct CesaroComparison {
    std::vector<CesaroEstimate> per_step;
    std::vector<CorrelationEstimate> difference;  // per_step[i] - per_step[0], i >= 1
};
CesaroComparison cesaro_compare(const SystemSpec& sys, std::span<const Observable> fs, std::int64_t N,
                                std::span<const std::int64_t> steps, std::int64_t draws, const Method& method);

struct SstEntry {
    int k = 0;                  // the tuple has k + 1 observables
    std::vector<int> tuple;     // generator indices
    std::int64_t n = 0;
    Complex corr_1;
    Complex corr_n;
    double corr_n_std_error = 0.0;
    double deviation = 0.0;     // |corr(n) - corr(1)|
    double std_error = 0.0;     // of the paired difference
    bool pass = true;
};

struct SstReport {
    std::vector<SstEntry> entries;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

/// Compares corr(n) with corr(1) for every tuple of generators of length
/// 2..k_max+1 and 2 <= n <= n_max. An entry passes iff
/// deviation <= tol + 3 * std_error.
SstReport sst_check(const SystemSpec& sys, std::span<const Observable> generators, int k_max, std::int64_t n_max,
                    double tol, const Method& method);

/// (1/N) sum_{n<=N} c_n e^{-2πinθ} with c_n = ∫ T^n f · conj(f) dμ.
CorrelationEstimate spectral_mass(const SystemSpec& sys, const Observable& f, double theta, std::int64_t N,
                                  const Method& method);
std::vector<CorrelationEstimate> spectral_mass_grid(const SystemSpec& sys, const Observable& f,
                                                    std::span<const double> thetas, std::int64_t N,
                                                    const Method& method);

struct RecurrenceHit {
    std::int64_t n = 0;
    CorrelationEstimate estimate;
    bool positive = false;  // estimate - 3 std_error > 0
};

struct RecurrenceScan {
    bool found = false;
    std::int64_t n = 0;  // first positive n, when found
    CorrelationEstimate estimate;
    std::vector<RecurrenceHit> scanned;  // every candidate n ≡ j (mod r), 1 <= n <= n_max
};

/// Scans μ(A ∩ T^{-n}A ∩ ⋯ ∩ T^{-kn}A) over n ≡ j (mod r). Not finding a
/// positive n within the budget is reported, not thrown.
RecurrenceScan recurrence_scan(const SystemSpec& sys, const BoxIndicator& a, int k, std::int64_t r, std::int64_t j,
                               std::int64_t n_max, const Method& method);

struct VdcResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

/// lhs = ‖(1/N) Σ x_n‖², rhs = 4 (B²/M + (1/M) Σ_{m<=M} |(1/N) Σ_{n<=N-m} <x_{n+m}, x_n>| + B² M/N)
/// with B = max ‖x_n‖. Vectors live in C^D with <u, v> = Σ u_d conj(v_d).
VdcResult finite_vdc_check(std::span<const std::vector<Complex>> xs, std::int64_t M);

}  // namespace sstlab
