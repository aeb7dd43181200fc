#include "sstlab/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sstlab/engine.hpp"
#include "sstlab/phase.hpp"

namespace sstlab {

namespace {

constexpr std::uint64_t kStreamCorrelation = 1;
constexpr std::uint64_t kStreamCesaro = 2;
constexpr std::uint64_t kStreamSst = 3;
constexpr std::uint64_t kStreamSpectral = 4;
constexpr std::uint64_t kStreamRecurrence = 5;

void check_observables(const SystemSpec& sys, std::span<const Observable> fs) {
    if (fs.empty()) throw std::invalid_argument("need at least one observable");
    for (const auto& f : fs) check_observable(sys, f);
}

void check_power_range(std::int64_t n, std::int64_t k) {
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (k > 0 && n > std::numeric_limits<std::int64_t>::max() / k)
        throw std::invalid_argument("n * k overflows");
}

Complex unit_phase(Phase p) {
    if (p.bits() == 0) return {1.0, 0.0};
    const double theta = 2.0 * std::numbers::pi * std::ldexp(static_cast<double>(p.bits()), -64);
    return {std::cos(theta), std::sin(theta)};
}

// ∏_j f_j(T^{j m} x), stopping at the first exact zero.
Complex orbit_product(OrbitProbe& probe, std::span<const Observable> fs, std::int64_t m) {
    Complex prod{1.0, 0.0};
    for (std::size_t j = 0; j < fs.size(); ++j) {
        prod *= probe.at(fs[j], static_cast<std::int64_t>(j) * m);
        if (prod == Complex{}) break;
    }
    return prod;
}

struct Strata {
    std::int64_t count;  // number of n-values per unit
    bool full;           // every n in 1..N, in order
};

Strata make_strata(std::int64_t N, std::int64_t draws) {
    if (N < 1) throw std::invalid_argument("Cesaro length N must be >= 1");
    if (draws <= 0 || draws >= N) return {N, true};
    return {draws, false};
}

std::int64_t stratum_value(const Strata& s, std::int64_t N, std::int64_t l, Rng& rng) {
    if (s.full) return l + 1;
    const double u = rng.uniform();
    const auto n = static_cast<std::int64_t>(std::floor((static_cast<double>(l) + u) * static_cast<double>(N) /
                                                        static_cast<double>(s.count)));
    return 1 + std::clamp<std::int64_t>(n, 0, N - 1);
}

}  // namespace

CorrelationEstimate multicorrelation(const SystemSpec& sys, std::span<const Observable> fs, std::int64_t n,
                                     const Method& method) {
    check_observables(sys, fs);
    check_power_range(n, static_cast<std::int64_t>(fs.size()) - 1);
    const VectorMoments m = estimate_units(sys, method, 1, kStreamCorrelation,
                                           [&](const Point& x, Rng&, Complex* out) {
                                               OrbitProbe probe(sys, x);
                                               out[0] += orbit_product(probe, fs, n);
                                           });
    return to_estimate(m.at(0), method);
}

CesaroComparison cesaro_compare(const SystemSpec& sys, std::span<const Observable> fs, std::int64_t N,
                                std::span<const std::int64_t> steps, std::int64_t draws, const Method& method) {
    check_observables(sys, fs);
    if (steps.empty()) throw std::invalid_argument("cesaro: need at least one step");
    const Strata strata = make_strata(N, draws);
    const auto k = static_cast<std::int64_t>(fs.size()) - 1;
    for (auto s : steps) {
        if (s < 1) throw std::invalid_argument("cesaro: step must be >= 1");
        check_power_range(N, k * s);
    }

    const std::size_t S = steps.size();
    const std::int64_t m = strata.count;
    const std::int64_t q1 = std::max<std::int64_t>(1, m / 4);
    const std::int64_t q2 = std::max<std::int64_t>(1, m / 2);
    const std::size_t dim = 3 * S + (S - 1);

    const VectorMoments moments = estimate_units(
        sys, method, dim, kStreamCesaro, [&](const Point& x, Rng& rng, Complex* out) {
            OrbitProbe probe(sys, x);
            std::vector<Complex> total(S);
            for (std::int64_t l = 0; l < m; ++l) {
                const std::int64_t n = stratum_value(strata, N, l, rng);
                for (std::size_t s = 0; s < S; ++s) {
                    total[s] += orbit_product(probe, fs, n * steps[s]);
                    if (l + 1 == q1) out[3 * s] += total[s] / static_cast<double>(q1);
                    if (l + 1 == q2) out[3 * s + 1] += total[s] / static_cast<double>(q2);
                }
            }
            for (std::size_t s = 0; s < S; ++s) out[3 * s + 2] += total[s] / static_cast<double>(m);
            for (std::size_t s = 1; s < S; ++s) out[3 * S + s - 1] += (total[s] - total[0]) / static_cast<double>(m);
        });

    auto checkpoint = [&](std::int64_t strata_used) {
        if (strata.full) return strata_used;
        return static_cast<std::int64_t>(std::llround(static_cast<double>(strata_used) * static_cast<double>(N) /
                                                      static_cast<double>(m)));
    };

    CesaroComparison result;
    for (std::size_t s = 0; s < S; ++s) {
        CesaroEstimate est;
        const std::int64_t cps[3] = {checkpoint(q1), checkpoint(q2), N};
        for (int q = 0; q < 3; ++q) {
            const auto mq = moments.at(3 * s + static_cast<std::size_t>(q));
            est.trace.push_back({cps[q], mq.mean(), mq.stderr_of_mean()});
        }
        est.estimate = to_estimate(moments.at(3 * s + 2), method);
        result.per_step.push_back(std::move(est));
    }
    for (std::size_t s = 1; s < S; ++s) result.difference.push_back(to_estimate(moments.at(3 * S + s - 1), method));
    return result;
}

CesaroEstimate cesaro_average(const SystemSpec& sys, std::span<const Observable> fs, const CesaroOptions& opts,
                              const Method& method) {
    const std::int64_t steps[1] = {opts.step};
    return std::move(cesaro_compare(sys, fs, opts.N, steps, opts.draws, method).per_step.front());
}

SstReport sst_check(const SystemSpec& sys, std::span<const Observable> generators, int k_max, std::int64_t n_max,
                    double tol, const Method& method) {
    check_observables(sys, generators);
    if (k_max < 1) throw std::invalid_argument("sst_check: k_max must be >= 1");
    if (n_max < 2) throw std::invalid_argument("sst_check: n_max must be >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("sst_check: tolerance must be > 0");
    check_power_range(n_max, k_max);

    const std::size_t G = generators.size();
    const int L_max = k_max + 1;
    // Tuples of length L (2..L_max) occupy [offset[L], offset[L] + G^L).
    std::vector<std::size_t> offset(static_cast<std::size_t>(L_max + 2), 0), count(static_cast<std::size_t>(L_max + 1), 1);
    for (int L = 1; L <= L_max; ++L) count[L] = count[L - 1] * G;
    std::size_t tuples = 0;
    for (int L = 2; L <= L_max; ++L) {
        offset[L] = tuples;
        tuples += count[L];
    }
    const auto nm = static_cast<std::size_t>(n_max);
    const std::size_t stride = 2 * nm - 1;
    const std::size_t dim = tuples * stride;

    const VectorMoments moments = estimate_units(
        sys, method, dim, kStreamSst, [&](const Point& x, Rng&, Complex* out) {
            OrbitProbe probe(sys, x);
            // values[(n-1)][j][g]; j = 0 is shared by every n.
            std::vector<Complex> base(G);
            {
                const Coords& c = probe.coords_at(0);
                for (std::size_t g = 0; g < G; ++g) base[g] = evaluate(generators[g], c);
            }
            std::vector<Complex> level(count[L_max]), next(count[L_max]);
            std::vector<Complex> first(tuples);
            std::vector<Complex> vals(static_cast<std::size_t>(L_max) * G);
            for (std::size_t n = 1; n <= nm; ++n) {
                std::copy(base.begin(), base.end(), vals.begin());
                for (int j = 1; j < L_max; ++j) {
                    const Coords& c = probe.coords_at(static_cast<std::int64_t>(j) * static_cast<std::int64_t>(n));
                    for (std::size_t g = 0; g < G; ++g) vals[static_cast<std::size_t>(j) * G + g] = evaluate(generators[g], c);
                }
                // Prefix products: level holds the G^j tuples of length j.
                std::copy(base.begin(), base.end(), level.begin());
                std::size_t width = G;
                for (int L = 2; L <= L_max; ++L) {
                    const Complex* v = &vals[static_cast<std::size_t>(L - 1) * G];
                    for (std::size_t idx = 0; idx < width; ++idx)
                        for (std::size_t g = 0; g < G; ++g) next[idx * G + g] = level[idx] * v[g];
                    width *= G;
                    std::swap(level, next);
                    for (std::size_t t = 0; t < width; ++t) {
                        const std::size_t row = (offset[L] + t) * stride;
                        const Complex z = level[t];
                        out[row + n - 1] += z;
                        if (n == 1) {
                            first[offset[L] + t] = z;
                        } else {
                            out[row + nm + n - 2] += z - first[offset[L] + t];
                        }
                    }
                }
            }
        });

    SstReport report;
    report.tolerance = tol;
    for (int L = 2; L <= L_max; ++L) {
        for (std::size_t t = 0; t < count[L]; ++t) {
            std::vector<int> tuple(static_cast<std::size_t>(L));
            std::size_t rem = t;
            for (int j = L - 1; j >= 0; --j) {
                tuple[static_cast<std::size_t>(j)] = static_cast<int>(rem % G);
                rem /= G;
            }
            const std::size_t row = (offset[L] + t) * stride;
            const Complex c1 = moments.at(row).mean();
            for (std::size_t n = 2; n <= nm; ++n) {
                SstEntry e;
                e.k = L - 1;
                e.tuple = tuple;
                e.n = static_cast<std::int64_t>(n);
                e.corr_1 = c1;
                const auto cn = moments.at(row + n - 1);
                e.corr_n = cn.mean();
                e.corr_n_std_error = cn.stderr_of_mean();
                const auto diff = moments.at(row + nm + n - 2);
                e.deviation = std::abs(diff.mean());
                e.std_error = diff.stderr_of_mean();
                e.pass = e.deviation <= tol + 3.0 * e.std_error;
                report.max_deviation = std::max(report.max_deviation, e.deviation);
                report.pass = report.pass && e.pass;
                report.entries.push_back(std::move(e));
            }
        }
    }
    return report;
}

std::vector<CorrelationEstimate> spectral_mass_grid(const SystemSpec& sys, const Observable& f,
                                                    std::span<const double> thetas, std::int64_t N,
                                                    const Method& method) {
    check_observable(sys, f);
    if (N < 1) throw std::invalid_argument("spectral_mass: N must be >= 1");
    if (thetas.empty()) throw std::invalid_argument("spectral_mass: need at least one theta");
    std::vector<Phase> angles;
    for (double t : thetas) angles.push_back(-Phase::from_double(t));
    const std::size_t dim = thetas.size();
    const double inv_n = 1.0 / static_cast<double>(N);

    const VectorMoments moments =
        estimate_units(sys, method, dim, kStreamSpectral, [&](const Point& x, Rng&, Complex* out) {
            OrbitProbe probe(sys, x);
            const Complex f0 = std::conj(probe.at(f, 0)) * inv_n;
            for (std::int64_t n = 1; n <= N; ++n) {
                const Complex s = probe.at(f, n) * f0;
                if (s == Complex{}) continue;
                for (std::size_t i = 0; i < dim; ++i) out[i] += s * unit_phase(n * angles[i]);
            }
        });

    std::vector<CorrelationEstimate> result;
    for (std::size_t i = 0; i < dim; ++i) result.push_back(to_estimate(moments.at(i), method));
    return result;
}

CorrelationEstimate spectral_mass(const SystemSpec& sys, const Observable& f, double theta, std::int64_t N,
                                  const Method& method) {
    const double thetas[1] = {theta};
    return spectral_mass_grid(sys, f, thetas, N, method).front();
}

RecurrenceScan recurrence_scan(const SystemSpec& sys, const BoxIndicator& a, int k, std::int64_t r, std::int64_t j,
                               std::int64_t n_max, const Method& method) {
    if (k < 1) throw std::invalid_argument("recurrence_scan: k must be >= 1");
    if (r < 1 || j < 0 || j >= r) throw std::invalid_argument("recurrence_scan: need 0 <= j < r");
    const Observable indicator = a;
    check_observable(sys, indicator);
    check_power_range(n_max, k);

    std::vector<std::int64_t> candidates;
    for (std::int64_t n = (j == 0 ? r : j); n <= n_max; n += r) candidates.push_back(n);
    if (candidates.empty()) throw std::invalid_argument("recurrence_scan: no candidate n within n_max");

    const VectorMoments moments = estimate_units(
        sys, method, candidates.size(), kStreamRecurrence, [&](const Point& x, Rng&, Complex* out) {
            OrbitProbe probe(sys, x);
            if (probe.at(indicator, 0) == Complex{}) return;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                Complex prod{1.0, 0.0};
                for (int i = 1; i <= k && prod != Complex{}; ++i) prod *= probe.at(indicator, i * candidates[c]);
                out[c] += prod;
            }
        });

    RecurrenceScan scan;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        RecurrenceHit hit;
        hit.n = candidates[c];
        hit.estimate = to_estimate(moments.at(c), method);
        hit.positive = hit.estimate.value.real() - 3.0 * hit.estimate.std_error > 0.0;
        if (hit.positive && !scan.found) {
            scan.found = true;
            scan.n = hit.n;
            scan.estimate = hit.estimate;
        }
        scan.scanned.push_back(std::move(hit));
    }
    return scan;
}

VdcResult finite_vdc_check(std::span<const std::vector<Complex>> xs, std::int64_t M) {
    const auto N = static_cast<std::int64_t>(xs.size());
    if (M < 1 || M > N) throw std::invalid_argument("finite_vdc_check: need 1 <= M <= N");
    const std::size_t D = xs.front().size();
    for (const auto& v : xs)
        if (v.size() != D) throw DimensionMismatch("finite_vdc_check: vectors differ in dimension");

    auto inner = [&](const std::vector<Complex>& u, const std::vector<Complex>& v) {
        Complex s;
        for (std::size_t d = 0; d < D; ++d) s += u[d] * std::conj(v[d]);
        return s;
    };

    std::vector<Complex> mean(D);
    double bound_sq = 0.0;
    for (const auto& v : xs) {
        double norm_sq = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            mean[d] += v[d];
            norm_sq += std::norm(v[d]);
        }
        bound_sq = std::max(bound_sq, norm_sq);
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    double lhs = 0.0;
    for (auto& c : mean) lhs += std::norm(c * inv_n);

    double corr_sum = 0.0;
    for (std::int64_t m = 1; m <= M; ++m) {
        Complex s;
        for (std::int64_t n = 0; n + m < N; ++n)
            s += inner(xs[static_cast<std::size_t>(n + m)], xs[static_cast<std::size_t>(n)]);
        corr_sum += std::abs(s * inv_n);
    }
    const double Md = static_cast<double>(M);
    const double rhs = 4.0 * (bound_sq / Md + corr_sum / Md + bound_sq * Md * inv_n);
    return {lhs, rhs, lhs <= rhs};
}

}  // namespace sstlab
