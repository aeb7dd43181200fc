#include "sstlab/ziegler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "sstlab/engine.hpp"
#include "sstlab/parallel.hpp"

namespace sstlab {

namespace {

constexpr std::uint64_t kStreamZieglerRhs = 21;
constexpr std::uint64_t kStreamErgodicStarts = 22;
constexpr std::uint64_t kStreamErgodicSpace = 23;

void check_fs(std::span<const Observable> fs, const SystemSpec& sys) {
    if (fs.empty()) throw std::invalid_argument("need at least one observable");
    if (static_cast<int>(fs.size()) - 1 > kMaxHkLength)
        throw std::invalid_argument("at most " + std::to_string(kMaxHkLength + 1) + " observables");
    for (const auto& f : fs) check_observable(sys, f);
}

Complex eval_at(const Observable& f, const HeisenbergPoint& p) {
    const double c[3] = {p.x1, p.x2, p.x3};
    return evaluate(f, std::span<const double>(c, 3));
}

}  // namespace

HkSample hk_from_parameters(int k, double u, double v, double w, double t) {
    if (k < 1 || k > kMaxHkLength) throw std::invalid_argument("hk_sample: k must be in [1, 16]");
    const HeisenbergPoint g{u, v, w};
    HkSample s;
    for (int i = 1; i <= k; ++i) {
        const double c2 = 0.5 * static_cast<double>(i) * static_cast<double>(i - 1);
        s.elements.push_back(heisenberg_mul(heisenberg_pow(g, i), HeisenbergPoint{0.0, 0.0, c2 * t}));
    }
    return s;
}

HkSample hk_sample(int k, Rng& rng) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double w = rng.uniform();
    const double t = rng.uniform();
    return hk_from_parameters(k, u, v, w, t);
}

CorrelationEstimate ziegler_rhs(const HeisenbergRot& nil, std::span<const Observable> fs, const MonteCarlo& mc,
                                const std::optional<HeisenbergPoint>& at) {
    const SystemSpec sys = nil;
    check_fs(fs, sys);
    if (at) check_point(sys, *at);
    const int k = static_cast<int>(fs.size()) - 1;
    const Method method = mc;
    const VectorMoments m =
        estimate_units(sys, method, 1, kStreamZieglerRhs, [&](const Point& drawn, Rng& rng, Complex* out) {
            const HeisenbergPoint x = at ? *at : std::get<HeisenbergPoint>(drawn);
            Complex prod = eval_at(fs[0], x);
            if (k >= 1) {
                const HkSample y = hk_sample(k, rng);
                for (int i = 1; i <= k && prod != Complex{}; ++i)
                    prod *= eval_at(fs[static_cast<std::size_t>(i)],
                                    reduce(heisenberg_mul(x, y.elements[static_cast<std::size_t>(i - 1)])));
            }
            out[0] += prod;
        });
    return to_estimate(m.at(0), method);
}

CesaroEstimate ziegler_lhs(const HeisenbergRot& nil, std::span<const Observable> fs, const ZieglerLhsOptions& opts) {
    const SystemSpec sys = nil;
    check_fs(fs, sys);
    if (opts.N < 1) throw std::invalid_argument("ziegler_lhs: N must be >= 1");
    if (opts.mode == LhsMode::Integrated) {
        CesaroOptions c;
        c.N = opts.N;
        c.draws = opts.draws;
        return cesaro_average(sys, fs, c, opts.starts);
    }

    // One orbit: deterministic sum over n = 1..N, split into fixed chunks.
    const Point start = opts.start;
    check_point(sys, start);
    const std::int64_t N = opts.N;
    const std::array<std::int64_t, 3> cps = {std::max<std::int64_t>(1, N / 4), std::max<std::int64_t>(1, N / 2), N};
    using Sums = std::array<Complex, 3>;
    const Sums sums = reduce_chunks(
        N, kChunkSize, Sums{},
        [&](std::int64_t, std::int64_t begin, std::int64_t end) {
            OrbitProbe probe(sys, start);
            Sums s{};
            for (std::int64_t u = begin; u < end; ++u) {
                const std::int64_t n = u + 1;
                Complex prod{1.0, 0.0};
                for (std::size_t j = 0; j < fs.size() && prod != Complex{}; ++j)
                    prod *= probe.at(fs[j], static_cast<std::int64_t>(j) * n);
                for (std::size_t q = 0; q < 3; ++q)
                    if (n <= cps[q]) s[q] += prod;
            }
            return s;
        },
        [](Sums& acc, const Sums& s) {
            for (std::size_t q = 0; q < 3; ++q) acc[q] += s[q];
        });

    CesaroEstimate est;
    for (std::size_t q = 0; q < 3; ++q)
        est.trace.push_back({cps[q], sums[q] / static_cast<double>(cps[q]), 0.0});
    est.estimate.value = est.trace.back().value;
    est.estimate.std_error = 0.0;
    est.estimate.budget = N;
    est.estimate.method = OrbitAverage{start, N};
    return est;
}

bool is_totally_ergodic(const SystemSpec& sys) {
    return std::holds_alternative<Rotation>(sys) || std::holds_alternative<RotSkew>(sys) ||
           std::holds_alternative<HeisenbergRot>(sys) || std::holds_alternative<BernoulliShift>(sys);
}

DilationInvarianceReport dilation_invariance_check(const SystemSpec& sys, std::int64_t r,
                                                   std::span<const Observable> fs, std::int64_t N,
                                                   std::int64_t draws, const Method& method, double tol) {
    if (!is_totally_ergodic(sys))
        throw std::invalid_argument("dilation invariance needs a totally ergodic system, got " + describe(sys));
    if (r < 1) throw std::invalid_argument("dilation_invariance_check: r must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("dilation_invariance_check: tolerance must be > 0");
    const std::int64_t steps[2] = {1, r};
    CesaroComparison cmp = cesaro_compare(sys, fs, N, steps, draws, method);
    DilationInvarianceReport rep;
    rep.step_one = std::move(cmp.per_step[0]);
    rep.step_r = std::move(cmp.per_step[1]);
    rep.deviation = std::abs(cmp.difference[0].value);
    rep.std_error = cmp.difference[0].std_error;
    rep.tolerance = tol;
    rep.pass = rep.deviation <= tol + 3.0 * rep.std_error;
    return rep;
}

UniqueErgodicityReport unique_ergodicity_check(const HeisenbergRot& nil, const Observable& f, std::int64_t N,
                                               int starts, std::uint64_t seed, std::int64_t space_samples,
                                               double stability_tol) {
    const SystemSpec sys = nil;
    check_observable(sys, f);
    if (N < 2) throw std::invalid_argument("unique_ergodicity_check: N must be >= 2");
    if (starts < 1) throw std::invalid_argument("unique_ergodicity_check: need at least one start");

    UniqueErgodicityReport rep;
    const Observable single[1] = {f};
    rep.space_average = multicorrelation(sys, single, 0, MonteCarlo{derive_seed(seed, kStreamErgodicSpace), space_samples});

    Rng rng(derive_seed(seed, kStreamErgodicStarts));
    const std::int64_t half = N / 2;
    for (int s = 0; s < starts; ++s) {
        const Point x = sample_invariant(sys, rng);
        using Sums = std::array<Complex, 2>;
        const Sums sums = reduce_chunks(
            N, kChunkSize, Sums{},
            [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                OrbitProbe probe(sys, x);
                Sums acc{};
                for (std::int64_t n = begin; n < end; ++n) {
                    const Complex v = probe.at(f, n);
                    acc[1] += v;
                    if (n < half) acc[0] += v;
                }
                return acc;
            },
            [](Sums& acc, const Sums& v) {
                acc[0] += v[0];
                acc[1] += v[1];
            });
        StartDiscrepancy d;
        d.start = std::get<HeisenbergPoint>(x);
        d.half_average = sums[0] / static_cast<double>(half);
        d.average = sums[1] / static_cast<double>(N);
        d.discrepancy = std::abs(d.average - rep.space_average.value);
        d.stable = std::abs(d.half_average - d.average) <= stability_tol;
        rep.max_discrepancy = std::max(rep.max_discrepancy, d.discrepancy);
        rep.all_stable = rep.all_stable && d.stable;
        rep.starts.push_back(d);
    }
    return rep;
}

}  // namespace sstlab
