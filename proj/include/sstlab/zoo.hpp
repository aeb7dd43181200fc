#pragma once

// Dilation maps τ_n of the strongly stationary examples, with checks of the
// commutation relation T τ_n = τ_n T^n and of measure preservation.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sstlab/dynamics.hpp"

namespace sstlab {

using i128 = __int128;
using IntMatrix = std::vector<std::vector<i128>>;

/// τ_n(x, y) = (n x, y) for Skew2.
struct Skew2Tau {};
/// τ_n(x) = M_n x on T^d for AffineSkew(d), M_n from derive_dilation_matrix.
struct AffineDTau {
    int d = 3;
};
/// (τ_n x)_i = x_{n i} on sequence space.
struct SeqDilation {};

struct DilationFamily : std::variant<Skew2Tau, AffineDTau, SeqDilation> {
    using variant::variant;
};

/// The dilation family attached to Skew2, AffineSkew and BernoulliShift.
DilationFamily default_dilation(const SystemSpec& sys);
/// Throws DimensionMismatch if the family does not act on the system's space.
void check_family(const SystemSpec& sys, const DilationFamily& fam);

/// Lower unipotent Jordan block of size d: the matrix of AffineSkew(d).
IntMatrix skew_matrix(int d);

/// The integer lower-triangular M_n with last row (0,...,0,1) solving
/// A M_n = M_n A^n, A = skew_matrix(d). Rows are filled from the bottom up:
/// M_{i-1,j} = sum_{l>j} M_{i,l} C(n, l-j). Requires 2 <= d <= 12, 1 <= n <= 64.
IntMatrix derive_dilation_matrix(int d, std::int64_t n);

Point tau(const DilationFamily& fam, std::int64_t n, const Point& p);
/// Window version of SeqDilation: the result has radius floor(radius / n).
SymbolWindow tau(const SeqDilation& fam, std::int64_t n, const SymbolWindow& w);

/// max over 1 <= n <= n_max and `samples` invariant points p of
/// dist(T τ_n p, τ_n T^n p).
double commutation_check(const SystemSpec& sys, const DilationFamily& fam, std::int64_t n_max,
                         std::int64_t samples, std::uint64_t seed);

struct MomentDeviation {
    Complex mean_original;  // E f
    Complex mean_dilated;   // E f∘τ_n
    double deviation = 0.0;
    double std_error = 0.0;  // of the paired difference
};

struct MeasurePreservationReport {
    std::vector<MomentDeviation> rows;  // one per observable
    double max_deviation = 0.0;
    double std_error_at_max = 0.0;
};

MeasurePreservationReport tau_measure_preserving_check(const SystemSpec& sys, const DilationFamily& fam,
                                                       std::int64_t n, std::span<const Observable> observables,
                                                       std::int64_t samples, std::uint64_t seed);

}  // namespace sstlab
