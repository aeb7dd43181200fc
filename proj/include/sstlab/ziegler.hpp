#pragma once

// Limit formulas for Heisenberg nilrotations: the H_k sampler, the integral
// ∫∫ f0(x) f1(x y1) ⋯ fk(x yk) dν_{H_k}(y) dμ(x), the orbit side
// (1/N) Σ_n ∏ f_i(T^{in} x), invariance of Cesàro limits under n -> r n, and
// orbit-versus-space averages.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sstlab/correlations.hpp"

namespace sstlab {

/// k elements of H_k: y_i = (u,v,w)^i (0,0,t)^{C(i,2)}, i = 1..k, unreduced.
struct HkSample {
    std::vector<HeisenbergPoint> elements;
};

inline constexpr int kMaxHkLength = 16;

/// The H_k tuple for fixed parameters (u, v, w, t). Requires 1 <= k <= 16.
HkSample hk_from_parameters(int k, double u, double v, double w, double t);
/// Draws (u, v, w, t) uniformly from [0,1)^4.
HkSample hk_sample(int k, Rng& rng);

/// Monte-Carlo estimate of ∫∫ f0(x) ∏_{i>=1} f_i(x y_i Γ) dν_{H_k}(y) dμ(x)
/// with k = fs.size() - 1. When `at` is set, x is held fixed at that point.
CorrelationEstimate ziegler_rhs(const HeisenbergRot& nil, std::span<const Observable> fs, const MonteCarlo& mc,
                                const std::optional<HeisenbergPoint>& at = std::nullopt);

enum class LhsMode { FromPoint, Integrated };

struct ZieglerLhsOptions {
    std::int64_t N = 1;
    LhsMode mode = LhsMode::Integrated;
    HeisenbergPoint start;        // FromPoint: the orbit start
    MonteCarlo starts;            // Integrated: random starts (seed, samples)
    std::int64_t draws = 0;       // Integrated: n-values per start (0 = all)
};

/// (1/N) Σ_{n=1..N} ∏_i f_i(T^{in} x), either at one start (standard error 0,
/// the sum is deterministic) or averaged over invariant starts.
CesaroEstimate ziegler_lhs(const HeisenbergRot& nil, std::span<const Observable> fs, const ZieglerLhsOptions& opts);

struct DilationInvarianceReport {
    CesaroEstimate step_one;
    CesaroEstimate step_r;
    double deviation = 0.0;  // |limit(step 1) - limit(step r)|
    double std_error = 0.0;  // of the paired difference
    double tolerance = 0.0;
    bool pass = true;        // deviation <= tol + 3 std_error
};

/// True for the variants that are totally ergodic when their parameters are
/// irrational: Rotation, RotSkew, HeisenbergRot, BernoulliShift.
bool is_totally_ergodic(const SystemSpec& sys);

/// Compares the Cesàro averages of ∫ f0 T^{n} f1 ⋯ T^{kn} fk along n and r n
/// on shared samples. Rejects systems that are not totally ergodic.
DilationInvarianceReport dilation_invariance_check(const SystemSpec& sys, std::int64_t r,
                                                   std::span<const Observable> fs, std::int64_t N,
                                                   std::int64_t draws, const Method& method, double tol = 1e-3);

struct StartDiscrepancy {
    HeisenbergPoint start;
    Complex half_average;  // over n < N/2
    Complex average;       // over n < N
    double discrepancy = 0.0;
    bool stable = true;    // |half_average - average| <= stability_tol
};

struct UniqueErgodicityReport {
    CorrelationEstimate space_average;
    std::vector<StartDiscrepancy> starts;
    double max_discrepancy = 0.0;
    bool all_stable = true;
};

/// max over random starts x of |(1/N) Σ_{n<N} f(T^n x) - ∫ f dμ|, with the
/// space average estimated from `space_samples` Haar draws.
UniqueErgodicityReport unique_ergodicity_check(const HeisenbergRot& nil, const Observable& f, std::int64_t N,
                                               int starts, std::uint64_t seed, std::int64_t space_samples,
                                               double stability_tol = 1e-2);

}  // namespace sstlab
