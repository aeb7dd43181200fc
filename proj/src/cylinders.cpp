#include "sstlab/cylinders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sstlab/engine.hpp"

namespace sstlab {

namespace {

constexpr std::uint64_t kStreamTable = 31;
constexpr std::uint64_t kStreamMajorization = 32;

std::size_t ipow(std::size_t base, std::size_t e) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= base;
    return r;
}

// Positions of all index sets, flattened for per-sample evaluation.
struct Layout {
    std::vector<IndexSet> family;
    std::vector<std::size_t> block_start;
    std::vector<std::int64_t> positions;             // distinct multipliers u
    std::vector<std::vector<std::size_t>> slots;     // per index set: indices into positions
    std::size_t alphabet = 0;
    std::size_t dims = 0;
};

Layout make_layout(std::vector<IndexSet> family, std::size_t alphabet) {
    Layout l;
    l.family = std::move(family);
    l.alphabet = alphabet;
    std::set<std::int64_t> pos;
    for (const auto& I : l.family) pos.insert(I.begin(), I.end());
    l.positions.assign(pos.begin(), pos.end());
    for (const auto& I : l.family) {
        l.block_start.push_back(l.dims);
        l.dims += ipow(alphabet, I.size());
        std::vector<std::size_t> s;
        for (auto i : I)
            s.push_back(static_cast<std::size_t>(std::lower_bound(l.positions.begin(), l.positions.end(), i) -
                                                 l.positions.begin()));
        l.slots.push_back(std::move(s));
    }
    return l;
}

void check_spec(const SystemSpec& sys, const TableSpec& spec) {
    if (spec.depth < 0) throw std::invalid_argument("table depth must be >= 0");
    if (spec.max_step < 1) throw std::invalid_argument("table max_step must be >= 1");
    if (spec.offsets.empty()) throw std::invalid_argument("table needs at least one offset");
    for (auto o : spec.offsets)
        if (o < 0) throw std::invalid_argument("table offsets must be >= 0");
    if (spec.coding.coordinate < 0 || spec.coding.coordinate >= coordinate_count(sys))
        throw DimensionMismatch("coding coordinate out of range for " + describe(sys));
    if (spec.kind == TableKind::Moments && (spec.max_freq < 1 || spec.max_freq > 16))
        throw std::invalid_argument("max_freq must be in [1, 16]");
    for (std::size_t i = 0; i < spec.coding.breakpoints.size(); ++i) {
        const double b = spec.coding.breakpoints[i];
        if (!(b > 0.0 && b < 1.0) || (i > 0 && !(b > spec.coding.breakpoints[i - 1])))
            throw std::invalid_argument("breakpoints must be strictly increasing inside (0,1)");
    }
}

std::size_t spec_alphabet(const TableSpec& spec) {
    return spec.kind == TableKind::Partition ? static_cast<std::size_t>(spec.coding.cells())
                                             : static_cast<std::size_t>(2 * spec.max_freq + 1);
}

// Adds w times the statistics of the orbit sampled at n * positions to out.
class StatisticsAccumulator {
public:
    StatisticsAccumulator(const Layout& layout, const TableSpec& spec)
        : layout_(layout), spec_(spec), cells_(layout.positions.size()),
          chars_(layout.positions.size() * layout.alphabet) {
        std::size_t widest = 1;
        for (const auto& I : layout.family) widest = std::max(widest, ipow(layout.alphabet, I.size()));
        level_.resize(widest);
        next_.resize(widest);
    }

    void add(OrbitProbe& probe, std::int64_t n, double w, Complex* out) {
        const auto coord = static_cast<std::size_t>(spec_.coding.coordinate);
        const std::size_t A = layout_.alphabet;
        for (std::size_t p = 0; p < layout_.positions.size(); ++p) {
            const double y = probe.coords_at(n * layout_.positions[p])[coord];
            if (spec_.kind == TableKind::Partition) {
                cells_[p] = spec_.coding.cell(y);
            } else {
                const int F = spec_.max_freq;
                for (int m = -F; m <= F; ++m) {
                    Complex c{1.0, 0.0};
                    if (m != 0) {
                        const double th = 2.0 * std::numbers::pi * static_cast<double>(m) * y;
                        c = {std::cos(th), std::sin(th)};
                    }
                    chars_[p * A + static_cast<std::size_t>(m + F)] = c;
                }
            }
        }
        for (std::size_t b = 0; b < layout_.family.size(); ++b) {
            Complex* block = out + layout_.block_start[b];
            const auto& slots = layout_.slots[b];
            if (spec_.kind == TableKind::Partition) {
                std::size_t code = 0;
                for (auto s : slots) code = code * A + static_cast<std::size_t>(cells_[s]);
                block[code] += w;
                continue;
            }
            std::size_t width = 1;
            level_[0] = {w, 0.0};
            for (auto s : slots) {
                const Complex* v = &chars_[s * A];
                for (std::size_t idx = 0; idx < width; ++idx)
                    for (std::size_t c = 0; c < A; ++c) next_[idx * A + c] = level_[idx] * v[c];
                width *= A;
                std::swap(level_, next_);
            }
            for (std::size_t t = 0; t < width; ++t) block[t] += level_[t];
        }
    }

private:
    const Layout& layout_;
    const TableSpec& spec_;
    std::vector<int> cells_;
    std::vector<Complex> chars_;
    std::vector<Complex> level_, next_;
};

CylinderTable empty_table(const TableSpec& spec, std::size_t alphabet) {
    CylinderTable t;
    t.kind = spec.kind;
    t.alphabet = static_cast<int>(alphabet);
    t.coding = spec.kind == TableKind::Partition
                   ? spec.coding.describe()
                   : "characters of coordinate " + std::to_string(spec.coding.coordinate);
    t.depth = spec.depth;
    return t;
}

std::uint64_t method_seed(const Method& method) {
    if (const auto* mc = std::get_if<MonteCarlo>(&method)) return mc->seed;
    return 0;
}

CylinderTable build_table(const SystemSpec& sys, const TableSpec& spec, std::int64_t N, std::int64_t draws,
                          const Method& method) {
    check_spec(sys, spec);
    if (N < 1) throw std::invalid_argument("sigma_av_build: N must be >= 1");
    const std::size_t A = spec_alphabet(spec);
    const Layout layout = make_layout(progression_family(spec), A);
    const std::int64_t max_pos = layout.positions.back();
    if (max_pos > 0 && N > kMaxWindow / max_pos) throw std::invalid_argument("window budget exceeded");

    const bool full = draws <= 0 || draws >= N;
    const std::int64_t m = full ? N : draws;
    const bool traced = N > 1;
    const std::int64_t q1 = std::max<std::int64_t>(1, m / 4);
    const std::int64_t q2 = std::max<std::int64_t>(1, m / 2);
    const std::size_t D = layout.dims;
    const std::size_t total_dims = traced ? 3 * D : D;
    const double inv_m = 1.0 / static_cast<double>(m);

    const VectorMoments moments =
        estimate_units(sys, method, total_dims, kStreamTable, [&](const Point& x, Rng& rng, Complex* out) {
            OrbitProbe probe(sys, x);
            StatisticsAccumulator acc(layout, spec);
            Complex* final_block = traced ? out + 2 * D : out;
            std::vector<Complex> running;
            if (traced) running.assign(D, Complex{});
            for (std::int64_t l = 0; l < m; ++l) {
                std::int64_t n = l + 1;
                if (!full) {
                    const double u = rng.uniform();
                    n = 1 + std::clamp<std::int64_t>(
                                static_cast<std::int64_t>(std::floor((static_cast<double>(l) + u) *
                                                                     static_cast<double>(N) / static_cast<double>(m))),
                                0, N - 1);
                }
                if (!traced) {
                    acc.add(probe, n, 1.0, final_block);
                    continue;
                }
                acc.add(probe, n, 1.0, running.data());
                if (l + 1 == q1)
                    for (std::size_t i = 0; i < D; ++i) out[i] += running[i] / static_cast<double>(q1);
                if (l + 1 == q2)
                    for (std::size_t i = 0; i < D; ++i) out[D + i] += running[i] / static_cast<double>(q2);
            }
            if (traced)
                for (std::size_t i = 0; i < D; ++i) final_block[i] += running[i] * inv_m;
        });

    CylinderTable table = empty_table(spec, A);
    table.budget = moments.count();
    table.seed = method_seed(method);
    table.averaged_over = N;
    const std::size_t final_off = traced ? 2 * D : 0;
    for (std::size_t b = 0; b < layout.family.size(); ++b) {
        const std::size_t size = ipow(A, layout.family[b].size());
        std::vector<CylinderEntry> vals(size);
        for (std::size_t t = 0; t < size; ++t) {
            const auto mom = moments.at(final_off + layout.block_start[b] + t);
            vals[t] = {mom.mean(), mom.stderr_of_mean()};
        }
        table.entries.emplace(layout.family[b], std::move(vals));
    }
    if (traced) {
        auto checkpoint = [&](std::int64_t used) {
            if (full) return used;
            return static_cast<std::int64_t>(
                std::llround(static_cast<double>(used) * static_cast<double>(N) / static_cast<double>(m)));
        };
        const std::int64_t cps[2] = {checkpoint(q1), checkpoint(q2)};
        for (int q = 0; q < 2; ++q) {
            double change = 0.0;
            for (std::size_t i = 0; i < D; ++i)
                change = std::max(change, std::abs(moments.at(static_cast<std::size_t>(q) * D + i).mean() -
                                                   moments.at(final_off + i).mean()));
            table.trace.push_back({cps[q], change});
        }
        table.trace.push_back({N, 0.0});
    }
    return table;
}

bool is_unit_progression(const IndexSet& I) {
    for (std::size_t i = 0; i < I.size(); ++i)
        if (I[i] != static_cast<std::int64_t>(i)) return false;
    return true;
}

IndexSet scaled(const IndexSet& I, std::int64_t n) {
    IndexSet out;
    for (auto i : I) out.push_back(i * n);
    return out;
}

std::vector<int> decode(std::size_t code, std::size_t len, std::size_t A) {
    std::vector<int> c(len);
    for (std::size_t i = len; i-- > 0;) {
        c[i] = static_cast<int>(code % A);
        code /= A;
    }
    return c;
}

void note(TableCheck& check, double deviation, double se, double tol) {
    ++check.compared;
    if (deviation >= check.max_deviation) {
        check.max_deviation = deviation;
        check.std_error_at_max = se;
    }
    if (deviation > tol + 3.0 * se) check.pass = false;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("read_table: bad number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("read_table: bad integer '" + s + "'");
    return v;
}

std::string expect_key(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("read_table: missing '" + key + "'");
    if (line.rfind(key + " ", 0) != 0) throw std::invalid_argument("read_table: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

}  // namespace

int CellCoding::cell(double y) const {
    return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), y) - breakpoints.begin());
}

std::string CellCoding::describe() const {
    std::ostringstream os;
    os << "cells of coordinate " << coordinate << " at";
    for (double b : breakpoints) os << ' ' << format_double(b);
    return os.str();
}

CellCoding CellCoding::dyadic(int coordinate, int levels) {
    if (levels < 1 || levels > 16) throw std::invalid_argument("dyadic coding: levels must be in [1, 16]");
    return uniform(coordinate, 1 << levels);
}

CellCoding CellCoding::uniform(int coordinate, int m) {
    if (m < 2) throw std::invalid_argument("coding needs at least two cells");
    CellCoding c;
    c.coordinate = coordinate;
    for (int i = 1; i < m; ++i) c.breakpoints.push_back(static_cast<double>(i) / static_cast<double>(m));
    return c;
}

const CylinderEntry& CylinderTable::at(const IndexSet& I, std::span<const int> codes) const {
    const auto it = entries.find(I);
    if (it == entries.end()) throw InsufficientDepth("index set not in table");
    if (codes.size() != I.size()) throw DimensionMismatch("cell vector length differs from index set");
    std::size_t code = 0;
    for (int c : codes) {
        if (c < 0 || c >= alphabet) throw std::out_of_range("cell code out of range");
        code = code * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(c);
    }
    return it->second[code];
}

int CylinderTable::code_value(int code) const { return kind == TableKind::Moments ? code - max_freq() : code; }
int CylinderTable::code_of(int value) const { return kind == TableKind::Moments ? value + max_freq() : value; }

bool CylinderTable::operator==(const CylinderTable& o) const {
    if (kind != o.kind || alphabet != o.alphabet || coding != o.coding || depth != o.depth || budget != o.budget ||
        seed != o.seed || averaged_over != o.averaged_over || trace.size() != o.trace.size() ||
        entries.size() != o.entries.size())
        return false;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace[i].checkpoint != o.trace[i].checkpoint || trace[i].max_change != o.trace[i].max_change) return false;
    for (const auto& [I, vals] : entries) {
        const auto it = o.entries.find(I);
        if (it == o.entries.end() || it->second.size() != vals.size()) return false;
        for (std::size_t t = 0; t < vals.size(); ++t)
            if (vals[t].value != it->second[t].value || vals[t].std_error != it->second[t].std_error) return false;
    }
    return true;
}

std::vector<IndexSet> progression_family(const TableSpec& spec) {
    std::set<IndexSet> family;
    for (auto o : spec.offsets)
        for (std::int64_t r = 1; r <= spec.max_step; ++r)
            for (int j = 0; j <= spec.depth; ++j) {
                IndexSet I;
                for (int l = 0; l <= j; ++l) I.push_back(o + l * r);
                family.insert(std::move(I));
            }
    return {family.begin(), family.end()};
}

CylinderTable estimate_cylinders(const SystemSpec& sys, const TableSpec& spec, const MonteCarlo& mc) {
    return build_table(sys, spec, 1, 0, mc);
}

CylinderTable sigma_av_build(const SystemSpec& sys, const TableSpec& spec, std::int64_t N, std::int64_t draws,
                             const Method& method) {
    return build_table(sys, spec, N, draws, method);
}

CylinderTable dilate(const CylinderTable& table, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("dilate: n must be >= 1");
    CylinderTable out = table;
    out.entries.clear();
    out.trace.clear();
    for (const auto& [J, vals] : table.entries) {
        if (!std::all_of(J.begin(), J.end(), [&](std::int64_t j) { return j % n == 0; })) continue;
        IndexSet I;
        for (auto j : J) I.push_back(j / n);
        out.entries.emplace(std::move(I), vals);
    }
    return out;
}

SstReport sigma_av_sst_check(const CylinderTable& table, std::int64_t n_max, double tol) {
    if (n_max < 2) throw std::invalid_argument("sigma_av_sst_check: n_max must be >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("sigma_av_sst_check: tolerance must be > 0");
    SstReport report;
    report.tolerance = tol;
    const auto A = static_cast<std::size_t>(table.alphabet);
    bool any = false;
    for (const auto& [I, vals] : table.entries) {
        if (I.size() < 2 || !is_unit_progression(I)) continue;
        any = true;
        for (std::int64_t n = 2; n <= n_max; ++n) {
            const auto it = table.entries.find(scaled(I, n));
            if (it == table.entries.end())
                throw InsufficientDepth("table lacks the index set " + std::to_string(n) + " x (0.." +
                                        std::to_string(I.size() - 1) + ")");
            for (std::size_t t = 0; t < vals.size(); ++t) {
                SstEntry e;
                e.k = static_cast<int>(I.size()) - 1;
                e.tuple = decode(t, I.size(), A);
                for (auto& c : e.tuple) c = table.code_value(c);
                e.n = n;
                e.corr_1 = vals[t].value;
                e.corr_n = it->second[t].value;
                e.corr_n_std_error = it->second[t].std_error;
                e.deviation = std::abs(e.corr_n - e.corr_1);
                e.std_error = vals[t].std_error + it->second[t].std_error;
                e.pass = e.deviation <= tol + 3.0 * e.std_error;
                report.max_deviation = std::max(report.max_deviation, e.deviation);
                report.pass = report.pass && e.pass;
                report.entries.push_back(std::move(e));
            }
        }
    }
    if (!any) throw InsufficientDepth("table has no progression (0, 1, ..., j) with j >= 1");
    return report;
}

TableCheck stationarity_check(const CylinderTable& table, double tol) {
    TableCheck check;
    for (const auto& [I, vals] : table.entries) {
        IndexSet shifted = I;
        for (auto& j : shifted) ++j;
        const auto it = table.entries.find(shifted);
        if (it == table.entries.end()) continue;
        for (std::size_t t = 0; t < vals.size(); ++t)
            note(check, std::abs(it->second[t].value - vals[t].value), vals[t].std_error + it->second[t].std_error,
                 tol);
    }
    return check;
}

TableCheck marginal_check(const CylinderTable& table, double tol) {
    if (table.kind != TableKind::Partition) throw std::invalid_argument("marginal_check needs a partition table");
    const auto A = static_cast<std::size_t>(table.alphabet);
    TableCheck check;
    for (const auto& [I, vals] : table.entries) {
        if (I.size() < 2) continue;
        const IndexSet prefix(I.begin(), I.end() - 1);
        const auto it = table.entries.find(prefix);
        if (it == table.entries.end()) continue;
        for (std::size_t p = 0; p < it->second.size(); ++p) {
            Complex sum;
            for (std::size_t c = 0; c < A; ++c) sum += vals[p * A + c].value;
            note(check, std::abs(sum - it->second[p].value), it->second[p].std_error, tol);
        }
    }
    if (table.entries.count(IndexSet{0})) {
        Complex total;
        for (const auto& e : table.entries.at(IndexSet{0})) total += e.value;
        note(check, std::abs(total - 1.0), 0.0, std::max(tol, 1e-12));
    }
    return check;
}

MajorizationResult majorize_fixed_point(const SystemSpec& sys, const CellCoding& coding, int depth, std::int64_t N,
                                        int m_check, const MonteCarlo& mc, double tol) {
    if (depth < 1) throw std::invalid_argument("majorize_fixed_point: depth must be >= 1");
    if (N < 1) throw std::invalid_argument("majorize_fixed_point: N must be >= 1");
    if (m_check < 2) throw std::invalid_argument("majorize_fixed_point: m_check must be >= 2");
    if (static_cast<double>(depth) * static_cast<double>(N) * static_cast<double>(m_check) >
        static_cast<double>(kMaxWindow))
        throw std::invalid_argument("majorize_fixed_point: window budget exceeded");

    TableSpec spec;
    spec.kind = TableKind::Partition;
    spec.coding = coding;
    spec.depth = depth;
    spec.max_step = m_check;
    spec.offsets = {0};

    MajorizationResult result;
    result.nu = sigma_av_build(sys, spec, N, 0, mc);

    // τ_m invariance of ν on the progressions (0, 1, ..., j).
    result.invariance.pass = true;
    for (const auto& [I, vals] : result.nu.entries) {
        if (!is_unit_progression(I)) continue;
        for (std::int64_t m = 2; m <= m_check; ++m) {
            const auto& other = result.nu.entries.at(scaled(I, m));
            for (std::size_t t = 0; t < vals.size(); ++t) {
                const double dev = std::abs(other[t].value - vals[t].value);
                ++result.invariance.compared;
                if (dev >= result.invariance.max_deviation) {
                    result.invariance.max_deviation = dev;
                    result.invariance.std_error_at_max = vals[t].std_error + other[t].std_error;
                }
            }
        }
    }
    result.invariance.pass = result.invariance.max_deviation <= tol;

    // Base probabilities at n (0, 1, ..., j) for every n <= N, on shared samples.
    TableSpec unit = spec;
    unit.max_step = 1;
    const std::size_t A = static_cast<std::size_t>(coding.cells());
    const Layout layout = make_layout(progression_family(unit), A);
    const std::size_t D = layout.dims;
    const auto NN = static_cast<std::size_t>(N);
    const VectorMoments moments = estimate_units(
        sys, mc, NN * D, kStreamMajorization, [&](const Point& x, Rng&, Complex* out) {
            OrbitProbe probe(sys, x);
            StatisticsAccumulator acc(layout, unit);
            for (std::int64_t n = 1; n <= N; ++n) acc.add(probe, n, 1.0, out + static_cast<std::size_t>(n - 1) * D);
        });

    for (std::size_t b = 0; b < layout.family.size(); ++b) {
        const IndexSet& I = layout.family[b];
        const auto& nu_vals = result.nu.entries.at(I);
        for (std::size_t t = 0; t < nu_vals.size(); ++t) {
            MajorizationRow row;
            row.index = I;
            row.cells = decode(t, I.size(), A);
            row.sup_base = -std::numeric_limits<double>::infinity();
            double se_sup = 0.0;
            for (std::size_t n = 0; n < NN; ++n) {
                const auto mom = moments.at(n * D + layout.block_start[b] + t);
                if (mom.mean().real() > row.sup_base) {
                    row.sup_base = mom.mean().real();
                    row.sup_at = static_cast<std::int64_t>(n + 1);
                    se_sup = mom.stderr_of_mean();
                }
            }
            row.nu = nu_vals[t].value.real();
            row.margin = row.sup_base - row.nu;
            row.std_error = se_sup + nu_vals[t].std_error;
            row.pass = row.margin >= -3.0 * row.std_error;
            result.majorization_pass = result.majorization_pass && row.pass;
            result.majorization.push_back(std::move(row));
        }
    }
    return result;
}

void write_table(std::ostream& out, const CylinderTable& table) {
    out << "sstlab-cylinder-table 1\n";
    out << "kind " << (table.kind == TableKind::Partition ? "partition" : "moments") << '\n';
    out << "alphabet " << table.alphabet << '\n';
    out << "coding " << table.coding << '\n';
    out << "depth " << table.depth << '\n';
    out << "budget " << table.budget << '\n';
    out << "seed " << table.seed << '\n';
    out << "averaged_over " << table.averaged_over << '\n';
    out << "trace " << table.trace.size() << '\n';
    for (const auto& c : table.trace) out << c.checkpoint << ' ' << format_double(c.max_change) << '\n';
    std::size_t count = 0;
    for (const auto& [I, vals] : table.entries) count += vals.size();
    out << "entries " << count << '\n';
    const auto A = static_cast<std::size_t>(table.alphabet);
    for (const auto& [I, vals] : table.entries) {
        for (std::size_t t = 0; t < vals.size(); ++t) {
            out << 'I';
            for (auto i : I) out << ' ' << i;
            out << " | C";
            for (int c : decode(t, I.size(), A)) out << ' ' << table.code_value(c);
            out << " | " << format_double(vals[t].value.real()) << ' ' << format_double(vals[t].value.imag()) << ' '
                << format_double(vals[t].std_error) << '\n';
        }
    }
}

CylinderTable read_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "sstlab-cylinder-table 1")
        throw std::invalid_argument("read_table: not a version-1 cylinder table");
    CylinderTable t;
    const std::string kind = expect_key(in, "kind");
    if (kind == "partition") {
        t.kind = TableKind::Partition;
    } else if (kind == "moments") {
        t.kind = TableKind::Moments;
    } else {
        throw std::invalid_argument("read_table: unknown kind '" + kind + "'");
    }
    t.alphabet = static_cast<int>(parse_int(expect_key(in, "alphabet")));
    if (t.alphabet < 1 || (t.kind == TableKind::Moments && t.alphabet % 2 == 0))
        throw std::invalid_argument("read_table: bad alphabet");
    t.coding = expect_key(in, "coding");
    t.depth = static_cast<int>(parse_int(expect_key(in, "depth")));
    t.budget = parse_int(expect_key(in, "budget"));
    t.seed = std::stoull(expect_key(in, "seed"));
    t.averaged_over = parse_int(expect_key(in, "averaged_over"));
    const std::int64_t trace_len = parse_int(expect_key(in, "trace"));
    for (std::int64_t i = 0; i < trace_len; ++i) {
        if (!std::getline(in, line)) throw std::invalid_argument("read_table: truncated trace");
        std::istringstream ls(line);
        std::string a, b;
        ls >> a >> b;
        t.trace.push_back({parse_int(a), parse_double(b)});
    }
    const std::int64_t count = parse_int(expect_key(in, "entries"));
    const auto A = static_cast<std::size_t>(t.alphabet);
    std::map<IndexSet, std::vector<bool>> seen;
    for (std::int64_t e = 0; e < count; ++e) {
        if (!std::getline(in, line)) throw std::invalid_argument("read_table: truncated entries");
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok != "I") throw std::invalid_argument("read_table: bad entry line '" + line + "'");
        IndexSet I;
        while (ls >> tok && tok != "|") I.push_back(parse_int(tok));
        ls >> tok;
        if (tok != "C") throw std::invalid_argument("read_table: bad entry line '" + line + "'");
        std::size_t code = 0;
        std::size_t len = 0;
        while (ls >> tok && tok != "|") {
            const int c = t.code_of(static_cast<int>(parse_int(tok)));
            if (c < 0 || c >= t.alphabet) throw std::invalid_argument("read_table: cell out of range");
            code = code * A + static_cast<std::size_t>(c);
            ++len;
        }
        if (I.empty() || len != I.size()) throw std::invalid_argument("read_table: bad entry line '" + line + "'");
        std::string re, im, se;
        if (!(ls >> re >> im >> se)) throw std::invalid_argument("read_table: bad entry line '" + line + "'");
        auto& vals = t.entries[I];
        auto& mark = seen[I];
        if (vals.empty()) {
            vals.resize(ipow(A, I.size()));
            mark.assign(vals.size(), false);
        }
        vals[code] = {Complex{parse_double(re), parse_double(im)}, parse_double(se)};
        mark[code] = true;
    }
    for (const auto& [I, mark] : seen)
        if (std::find(mark.begin(), mark.end(), false) != mark.end())
            throw std::invalid_argument("read_table: incomplete index set");
    return t;
}

}  // namespace sstlab
