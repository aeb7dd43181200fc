#include "sstlab/zoo.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sstlab/parallel.hpp"
#include "sstlab/phase.hpp"

namespace sstlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("derive_dilation_matrix: 128-bit overflow");
    return r;
}

i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("derive_dilation_matrix: 128-bit overflow");
    return r;
}

i128 binom128(std::int64_t n, int r) {
    if (r < 0 || r > n) return 0;
    i128 c = 1;
    for (int i = 0; i < r; ++i) c = checked_mul(c, n - i) / (i + 1);
    return c;
}

int torus_dim(const SystemSpec& sys) {
    if (std::holds_alternative<Skew2>(sys)) return 2;
    if (const auto* a = std::get_if<AffineSkew>(&sys)) return a->d;
    return -1;
}

int family_dim(const DilationFamily& fam) {
    if (std::holds_alternative<Skew2Tau>(fam)) return 2;
    if (const auto* a = std::get_if<AffineDTau>(&fam)) return a->d;
    return -1;
}

// M_n reduced modulo 2^64, row-major; acts exactly on phases.
std::vector<std::uint64_t> matrix_mod64(const DilationFamily& fam, std::int64_t n) {
    const int d = family_dim(fam);
    const IntMatrix m = derive_dilation_matrix(d, n);
    std::vector<std::uint64_t> out(static_cast<std::size_t>(d * d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out[static_cast<std::size_t>(i * d + j)] = static_cast<std::uint64_t>(static_cast<u128>(m[i][j]));
    return out;
}

TorusPoint apply_matrix(const std::vector<std::uint64_t>& m, const TorusPoint& p) {
    const std::size_t d = p.coords.size();
    boost::container::small_vector<Phase, 8> x;
    for (double c : p.coords) x.push_back(Phase::from_double(c));
    TorusPoint out;
    for (std::size_t i = 0; i < d; ++i) {
        Phase acc;
        for (std::size_t j = 0; j <= i; ++j) acc += m[i * d + j] * x[j];
        out.coords.push_back(acc.to_double());
    }
    return out;
}

Point dilate_shift(const ShiftPoint& p, std::int64_t n) {
    ShiftPoint q = p;
    q.stride = static_cast<std::int64_t>(static_cast<std::uint64_t>(p.stride) * static_cast<std::uint64_t>(n));
    return q;
}

void check_n(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("tau: n must be >= 1");
}

}  // namespace

DilationFamily default_dilation(const SystemSpec& sys) {
    if (std::holds_alternative<Skew2>(sys)) return Skew2Tau{};
    if (const auto* a = std::get_if<AffineSkew>(&sys)) return AffineDTau{a->d};
    if (std::holds_alternative<BernoulliShift>(sys)) return SeqDilation{};
    throw std::invalid_argument("no dilation family for " + describe(sys));
}

void check_family(const SystemSpec& sys, const DilationFamily& fam) {
    if (std::holds_alternative<SeqDilation>(fam)) {
        if (!std::holds_alternative<BernoulliShift>(sys))
            throw DimensionMismatch("sequence dilation needs a sequence-space system");
        return;
    }
    if (torus_dim(sys) != family_dim(fam))
        throw DimensionMismatch("dilation family does not match " + describe(sys));
}

IntMatrix skew_matrix(int d) {
    IntMatrix a(static_cast<std::size_t>(d), std::vector<i128>(static_cast<std::size_t>(d), 0));
    for (int i = 0; i < d; ++i) {
        a[i][i] = 1;
        if (i > 0) a[i][i - 1] = 1;
    }
    return a;
}

IntMatrix derive_dilation_matrix(int d, std::int64_t n) {
    if (d < 2 || d > 12) throw std::invalid_argument("derive_dilation_matrix: d must be in [2, 12]");
    if (n < 1 || n > 64) throw std::invalid_argument("derive_dilation_matrix: n must be in [1, 64]");
    const auto D = static_cast<std::size_t>(d);
    IntMatrix m(D, std::vector<i128>(D, 0));
    m[D - 1][D - 1] = 1;

    // Row i of A M equals M_{i,j} + M_{i-1,j}; row i of M A^n equals
    // sum_{l>=j} M_{i,l} C(n, l-j). Equating determines row i-1 from row i.
    for (int i = d - 1; i >= 1; --i) {
        for (int j = 0; j < d; ++j) {
            i128 acc = 0;
            for (int l = j + 1; l < d; ++l) acc = checked_add(acc, checked_mul(m[i][l], binom128(n, l - j)));
            m[i - 1][j] = acc;
        }
    }

    // Consistency: the top row equation and lower-triangularity.
    for (int j = 0; j < d; ++j) {
        i128 rhs = 0;
        for (int l = j; l < d; ++l) rhs = checked_add(rhs, checked_mul(m[0][l], binom128(n, l - j)));
        if (rhs != m[0][j]) throw std::logic_error("derive_dilation_matrix: inconsistent system");
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (m[i][j] != 0) throw std::logic_error("derive_dilation_matrix: solution is not lower-triangular");
    return m;
}

Point tau(const DilationFamily& fam, std::int64_t n, const Point& p) {
    check_n(n);
    return std::visit(Overloaded{
                          [&](const SeqDilation&) -> Point {
                              const auto* s = std::get_if<ShiftPoint>(&p);
                              if (s == nullptr) throw DimensionMismatch("sequence dilation needs a sequence point");
                              return dilate_shift(*s, n);
                          },
                          [&](const auto&) -> Point {
                              const auto* t = std::get_if<TorusPoint>(&p);
                              const int d = family_dim(fam);
                              if (t == nullptr || static_cast<int>(t->coords.size()) != d)
                                  throw DimensionMismatch("dilation expects a point of T^" + std::to_string(d));
                              return apply_matrix(matrix_mod64(fam, n), *t);
                          },
                      },
                      fam);
}

SymbolWindow tau(const SeqDilation&, std::int64_t n, const SymbolWindow& w) {
    check_n(n);
    SymbolWindow out;
    out.alphabet = w.alphabet;
    out.radius = static_cast<int>(w.radius / n);
    for (int i = -out.radius; i <= out.radius; ++i) out.symbols.push_back(w.at(static_cast<int>(n * i)));
    return out;
}

double commutation_check(const SystemSpec& sys, const DilationFamily& fam, std::int64_t n_max,
                         std::int64_t samples, std::uint64_t seed) {
    check_family(sys, fam);
    if (n_max < 1) throw std::invalid_argument("commutation_check: n_max must be >= 1");

    const bool torus = !std::holds_alternative<SeqDilation>(fam);
    std::vector<std::vector<std::uint64_t>> mats;
    if (torus)
        for (std::int64_t n = 1; n <= n_max; ++n) mats.push_back(matrix_mod64(fam, n));

    auto dilate = [&](std::int64_t n, const Point& p) -> Point {
        if (torus) return apply_matrix(mats[static_cast<std::size_t>(n - 1)], std::get<TorusPoint>(p));
        return dilate_shift(std::get<ShiftPoint>(p), n);
    };

    return reduce_chunks(
        samples, kChunkSize, 0.0,
        [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
            Rng rng(derive_seed(seed, 11, static_cast<std::uint64_t>(chunk)));
            double worst = 0.0;
            for (std::int64_t s = begin; s < end; ++s) {
                const Point p = sample_invariant(sys, rng);
                for (std::int64_t n = 1; n <= n_max; ++n) {
                    const Point lhs = sstlab::apply(sys, dilate(n, p));
                    const Point rhs = dilate(n, iterate_pow(sys, p, n));
                    worst = std::max(worst, point_distance(sys, lhs, rhs));
                }
            }
            return worst;
        },
        [](double& acc, double v) { acc = std::max(acc, v); });
}

MeasurePreservationReport tau_measure_preserving_check(const SystemSpec& sys, const DilationFamily& fam,
                                                       std::int64_t n, std::span<const Observable> observables,
                                                       std::int64_t samples, std::uint64_t seed) {
    check_family(sys, fam);
    check_n(n);
    for (const auto& f : observables) check_observable(sys, f);
    const std::size_t k = observables.size();
    const std::size_t dim = 3 * k;  // f, f∘τ_n, difference

    const VectorMoments moments = reduce_chunks(
        samples, kChunkSize, VectorMoments(dim),
        [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
            Rng rng(derive_seed(seed, 12, static_cast<std::uint64_t>(chunk)));
            VectorMoments acc(dim);
            std::vector<Complex> row(dim);
            for (std::int64_t s = begin; s < end; ++s) {
                const Point p = sample_invariant(sys, rng);
                const Point q = tau(fam, n, p);
                const Coords cp = coordinates(sys, p);
                const Coords cq = coordinates(sys, q);
                for (std::size_t i = 0; i < k; ++i) {
                    const Complex a = evaluate(observables[i], cp);
                    const Complex b = evaluate(observables[i], cq);
                    row[3 * i] = a;
                    row[3 * i + 1] = b;
                    row[3 * i + 2] = b - a;
                }
                acc.add(row.data());
            }
            return acc;
        },
        [](VectorMoments& acc, const VectorMoments& v) { acc.merge(v); });

    MeasurePreservationReport report;
    for (std::size_t i = 0; i < k; ++i) {
        MomentDeviation row;
        row.mean_original = moments.at(3 * i).mean();
        row.mean_dilated = moments.at(3 * i + 1).mean();
        const auto diff = moments.at(3 * i + 2);
        row.deviation = std::abs(diff.mean());
        row.std_error = diff.stderr_of_mean();
        if (row.deviation >= report.max_deviation) {
            report.max_deviation = row.deviation;
            report.std_error_at_max = row.std_error;
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace sstlab
