#include "sstlab/dynamics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sstlab/phase.hpp"

namespace sstlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double x) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), end);
}

constexpr int kMaxTorusDim = 16;

using PhaseVec = boost::container::small_vector<Phase, 8>;

PhaseVec to_phases(const Coords& c) {
    PhaseVec out;
    out.reserve(c.size());
    for (double x : c) out.push_back(Phase::from_double(x));
    return out;
}

TorusPoint from_phases(const PhaseVec& v) {
    TorusPoint p;
    p.coords.reserve(v.size());
    for (Phase x : v) p.coords.push_back(x.to_double());
    return p;
}

// T^n for x -> J x + b on T^dim, J the lower unipotent Jordan block:
// (J^n x)_i = sum_r C(n, r) x_{i-r} and sum_{j<n} J^j b has entries C(n, r+1).
PhaseVec jordan_affine_pow(const PhaseVec& x, const PhaseVec& b, std::uint64_t n) {
    const std::size_t dim = x.size();
    std::array<std::uint64_t, kMaxTorusDim + 2> binom{};
    for (unsigned r = 0; r <= dim; ++r) binom[r] = binom_mod64(n, r);
    PhaseVec out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        Phase acc;
        for (std::size_t r = 0; r <= i; ++r) {
            acc += binom[r] * x[i - r];
            if (!b.empty()) acc += binom[r + 1] * b[i - r];
        }
        out[i] = acc;
    }
    return out;
}

struct TorusAffine {
    int dim;
    PhaseVec b;  // empty for linear maps
};

TorusAffine torus_form(const Rotation& s) { return {1, {Phase::from_double(s.a)}}; }
TorusAffine torus_form(const Skew2&) { return {2, {}}; }
TorusAffine torus_form(const AffineSkew& s) { return {s.d, {}}; }
TorusAffine torus_form(const RotSkew& s) { return {2, {Phase::from_double(s.a), Phase{}}}; }

// Canonical form of a^n · p on G/Γ, evaluated in 64-bit fixed point with
// 128-bit intermediates. With X = a^n p,
//   X1 = n a1 + p1,  X2 = n a2 + p2,
//   X3 = n a3 + C(n,2) a1 a2 + p3 + n a1 p2,
// and the representative is (frac X1, frac X2, frac(X3 - frac(X1) ⌊X2⌋)).
HeisenbergPoint heisenberg_translate(const HeisenbergRot& s, const HeisenbergPoint& p, std::uint64_t n) {
    const double f1 = std::floor(s.a1), f2 = std::floor(s.a2);
    const auto i1 = static_cast<std::uint64_t>(static_cast<std::int64_t>(f1));
    const auto i2 = static_cast<std::uint64_t>(static_cast<std::int64_t>(f2));
    const Phase a1 = Phase::from_double(s.a1 - f1);
    const Phase a2 = Phase::from_double(s.a2 - f2);
    const Phase a3 = Phase::from_double(s.a3);
    const Phase p1 = Phase::from_double(p.x1);
    const Phase p2 = Phase::from_double(p.x2);
    const Phase p3 = Phase::from_double(p.x3);

    const u128 n_a1 = u128(n) * a1.bits();
    const Phase c1 = Phase::from_bits(static_cast<std::uint64_t>(n_a1)) + p1;

    const u128 n_a2 = u128(n) * a2.bits() + p2.bits();
    const Phase c2 = Phase::from_bits(static_cast<std::uint64_t>(n_a2));
    const std::uint64_t floor_x2 = n * i2 + static_cast<std::uint64_t>(n_a2 >> 64);

    // C(n,2) a1 a2 mod 1 with a1 = i1 + A1, a2 = i2 + A2.
    const u128 pairs = (u128(n) * (n == 0 ? 0 : n - 1)) >> 1;
    const auto pairs64 = static_cast<std::uint64_t>(pairs);
    const u128 frac_prod = u128(a1.bits()) * a2.bits();
    Phase quad = Phase::from_bits(static_cast<std::uint64_t>((pairs * frac_prod) >> 64));
    quad += (pairs64 * i1) * a2;
    quad += (pairs64 * i2) * a1;

    // n a1 p2 mod 1.
    Phase cross = (n * i1) * p2;
    cross += static_cast<std::uint64_t>(n_a1 >> 64) * p2;
    cross += mul_frac(Phase::from_bits(static_cast<std::uint64_t>(n_a1)), p2);

    const Phase c3 = n * a3 + p3 + quad + cross - floor_x2 * c1;
    return {c1.to_double(), c2.to_double(), c3.to_double()};
}

std::uint64_t checked_power(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("iterate_pow: negative power");
    return static_cast<std::uint64_t>(n);
}

[[noreturn]] void mismatch(const std::string& what) { throw DimensionMismatch(what); }

const TorusPoint& as_torus(const Point& p, int dim) {
    const auto* t = std::get_if<TorusPoint>(&p);
    if (t == nullptr) mismatch("expected a torus point");
    if (static_cast<int>(t->coords.size()) != dim)
        mismatch("torus point has " + std::to_string(t->coords.size()) + " coordinates, system expects " +
                 std::to_string(dim));
    return *t;
}

const HeisenbergPoint& as_heisenberg(const Point& p) {
    const auto* h = std::get_if<HeisenbergPoint>(&p);
    if (h == nullptr) mismatch("expected a Heisenberg point");
    return *h;
}

const ShiftPoint& as_shift(const Point& p) {
    const auto* s = std::get_if<ShiftPoint>(&p);
    if (s == nullptr) mismatch("expected a sequence point");
    return *s;
}

const ProductPoint& as_product(const Point& p, std::size_t parts) {
    const auto* q = std::get_if<ProductPoint>(&p);
    if (q == nullptr) mismatch("expected a product point");
    if (q->parts.size() != parts) mismatch("product point has the wrong number of factors");
    return *q;
}

void validate_probabilities(const std::vector<double>& p) {
    if (p.size() < 2) throw std::invalid_argument("bernoulli: alphabet size must be at least 2");
    double total = 0.0;
    for (double q : p) {
        if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("bernoulli: probabilities must be >= 0");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("bernoulli: probabilities must sum to 1");
}

}  // namespace

int SymbolWindow::at(int i) const {
    if (i < -radius || i > radius) throw std::out_of_range("SymbolWindow: index outside window");
    return symbols[static_cast<std::size_t>(i + radius)];
}

// ---------------------------------------------------------------------------

SystemSpec rotation(double a) { return Rotation{mod1(a)}; }
SystemSpec skew2() { return Skew2{}; }
SystemSpec affine_skew(int d) {
    if (d < 2 || d > kMaxTorusDim) throw std::invalid_argument("affine_skew: d must be in [2, 16]");
    return AffineSkew{d};
}
SystemSpec rot_skew(double a) { return RotSkew{mod1(a)}; }
SystemSpec heisenberg_rot(double a1, double a2, double a3) {
    if (!std::isfinite(a1) || !std::isfinite(a2)) throw std::invalid_argument("heisenberg_rot: non-finite parameter");
    return HeisenbergRot{a1, a2, mod1(a3)};
}
SystemSpec bernoulli_shift(std::vector<double> p) {
    validate_probabilities(p);
    return BernoulliShift{std::move(p)};
}
SystemSpec product(std::vector<SystemSpec> factors) {
    if (factors.empty()) throw std::invalid_argument("product: needs at least one factor");
    return ProductSystem{std::move(factors)};
}

std::string describe(const SystemSpec& sys) {
    return std::visit(Overloaded{
                          [](const Rotation& s) { return "rotation:a=" + fmt(s.a); },
                          [](const Skew2&) { return std::string("skew2"); },
                          [](const AffineSkew& s) { return "affine:d=" + std::to_string(s.d); },
                          [](const RotSkew& s) { return "rotskew:a=" + fmt(s.a); },
                          [](const HeisenbergRot& s) {
                              return "heisenberg:a1=" + fmt(s.a1) + ",a2=" + fmt(s.a2) + ",a3=" + fmt(s.a3);
                          },
                          [](const BernoulliShift& s) {
                              std::string out = "bernoulli:p=";
                              for (std::size_t i = 0; i < s.p.size(); ++i) out += (i ? "/" : "") + fmt(s.p[i]);
                              return out;
                          },
                          [](const ProductSystem& s) {
                              std::string out;
                              for (std::size_t i = 0; i < s.factors.size(); ++i)
                                  out += (i ? "*" : "") + describe(s.factors[i]);
                              return out;
                          },
                      },
                      sys);
}

int coordinate_count(const SystemSpec& sys) {
    return std::visit(Overloaded{
                          [](const Rotation&) { return 1; },
                          [](const Skew2&) { return 2; },
                          [](const AffineSkew& s) { return s.d; },
                          [](const RotSkew&) { return 2; },
                          [](const HeisenbergRot&) { return 3; },
                          [](const BernoulliShift&) { return 1; },
                          [](const ProductSystem& s) {
                              int n = 0;
                              for (const auto& f : s.factors) n += coordinate_count(f);
                              return n;
                          },
                      },
                      sys);
}

bool is_uniquely_ergodic(const SystemSpec& sys) {
    return std::visit(Overloaded{
                          [](const Rotation&) { return true; },
                          [](const RotSkew&) { return true; },
                          [](const HeisenbergRot&) { return true; },
                          [](const auto&) { return false; },
                      },
                      sys);
}

// ---------------------------------------------------------------------------

HeisenbergPoint heisenberg_mul(const HeisenbergPoint& g, const HeisenbergPoint& h) {
    return {g.x1 + h.x1, g.x2 + h.x2, g.x3 + h.x3 + g.x1 * h.x2};
}

HeisenbergPoint heisenberg_pow(const HeisenbergPoint& g, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("heisenberg_pow: negative power");
    const double nn = static_cast<double>(n);
    const double pairs = nn * (nn - 1.0) / 2.0;
    return {nn * g.x1, nn * g.x2, nn * g.x3 + pairs * g.x1 * g.x2};
}

HeisenbergPoint reduce(const HeisenbergPoint& raw) {
    const double k2 = std::floor(raw.x2);
    if (!(std::abs(k2) < 9.0e18)) throw std::invalid_argument("reduce: coordinate out of range");
    const double c1 = mod1(raw.x1);
    const double c2 = mod1(raw.x2);
    const Phase c3 = Phase::from_double(raw.x3) - static_cast<std::int64_t>(k2) * Phase::from_double(c1);
    return {c1, c2, c3.to_double()};
}

TorusPoint reduce(const TorusPoint& raw) {
    TorusPoint out;
    out.coords.reserve(raw.coords.size());
    for (double x : raw.coords) out.coords.push_back(mod1(x));
    return out;
}

// ---------------------------------------------------------------------------

void check_point(const SystemSpec& sys, const Point& p) {
    std::visit(Overloaded{
                   [&](const Rotation&) { as_torus(p, 1); },
                   [&](const Skew2&) { as_torus(p, 2); },
                   [&](const AffineSkew& s) { as_torus(p, s.d); },
                   [&](const RotSkew&) { as_torus(p, 2); },
                   [&](const HeisenbergRot&) { as_heisenberg(p); },
                   [&](const BernoulliShift&) { as_shift(p); },
                   [&](const ProductSystem& s) {
                       const auto& q = as_product(p, s.factors.size());
                       for (std::size_t i = 0; i < s.factors.size(); ++i) check_point(s.factors[i], q.parts[i]);
                   },
               },
               sys);
}

Point iterate_pow(const SystemSpec& sys, const Point& p, std::int64_t n) {
    const std::uint64_t power = checked_power(n);
    auto torus = [&](const auto& s) -> Point {
        const TorusAffine form = torus_form(s);
        const TorusPoint& t = as_torus(p, form.dim);
        return from_phases(jordan_affine_pow(to_phases(t.coords), form.b, power));
    };
    return std::visit(Overloaded{
                          [&](const Rotation& s) { return torus(s); },
                          [&](const Skew2& s) { return torus(s); },
                          [&](const AffineSkew& s) { return torus(s); },
                          [&](const RotSkew& s) { return torus(s); },
                          [&](const HeisenbergRot& s) -> Point {
                              return heisenberg_translate(s, as_heisenberg(p), power);
                          },
                          [&](const BernoulliShift&) -> Point {
                              ShiftPoint q = as_shift(p);
                              q.offset = static_cast<std::int64_t>(static_cast<std::uint64_t>(q.offset) +
                                                                   power * static_cast<std::uint64_t>(q.stride));
                              return q;
                          },
                          [&](const ProductSystem& s) -> Point {
                              const auto& q = as_product(p, s.factors.size());
                              ProductPoint out;
                              out.parts.reserve(q.parts.size());
                              for (std::size_t i = 0; i < s.factors.size(); ++i)
                                  out.parts.push_back(iterate_pow(s.factors[i], q.parts[i], n));
                              return out;
                          },
                      },
                      sys);
}

Point apply(const SystemSpec& sys, const Point& p) { return iterate_pow(sys, p, 1); }

Point sample_invariant(const SystemSpec& sys, Rng& rng) {
    auto uniform_torus = [&](int d) -> Point {
        TorusPoint t;
        for (int i = 0; i < d; ++i) t.coords.push_back(rng.uniform());
        return t;
    };
    return std::visit(Overloaded{
                          [&](const Rotation&) { return uniform_torus(1); },
                          [&](const Skew2&) { return uniform_torus(2); },
                          [&](const AffineSkew& s) { return uniform_torus(s.d); },
                          [&](const RotSkew&) { return uniform_torus(2); },
                          [&](const HeisenbergRot&) -> Point {
                              HeisenbergPoint h;
                              h.x1 = rng.uniform();
                              h.x2 = rng.uniform();
                              h.x3 = rng.uniform();
                              return h;
                          },
                          [&](const BernoulliShift&) -> Point { return ShiftPoint{rng.next(), 0, 1}; },
                          [&](const ProductSystem& s) -> Point {
                              ProductPoint out;
                              for (const auto& f : s.factors) out.parts.push_back(sample_invariant(f, rng));
                              return out;
                          },
                      },
                      sys);
}

int symbol_at(const BernoulliShift& sys, const ShiftPoint& p, std::int64_t i) {
    const std::uint64_t pos = static_cast<std::uint64_t>(p.offset) +
                              static_cast<std::uint64_t>(p.stride) * static_cast<std::uint64_t>(i);
    const double u = to_unit(mix64(p.key + pos * kGoldenGamma));
    double cdf = 0.0;
    const int m = static_cast<int>(sys.p.size());
    for (int s = 0; s < m - 1; ++s) {
        cdf += sys.p[static_cast<std::size_t>(s)];
        if (u < cdf) return s;
    }
    return m - 1;
}

SymbolWindow window(const BernoulliShift& sys, const ShiftPoint& p, int radius) {
    if (radius < 0) throw std::invalid_argument("window: negative radius");
    SymbolWindow w;
    w.radius = radius;
    w.alphabet = static_cast<int>(sys.p.size());
    w.symbols.reserve(static_cast<std::size_t>(2 * radius + 1));
    for (int i = -radius; i <= radius; ++i) w.symbols.push_back(symbol_at(sys, p, i));
    return w;
}

void coordinates(const SystemSpec& sys, const Point& p, Coords& out) {
    std::visit(Overloaded{
                   [&](const HeisenbergRot&) {
                       const auto& h = as_heisenberg(p);
                       out.push_back(h.x1);
                       out.push_back(h.x2);
                       out.push_back(h.x3);
                   },
                   [&](const BernoulliShift& s) {
                       const int sym = symbol_at(s, as_shift(p), 0);
                       out.push_back((sym + 0.5) / static_cast<double>(s.p.size()));
                   },
                   [&](const ProductSystem& s) {
                       const auto& q = as_product(p, s.factors.size());
                       for (std::size_t i = 0; i < s.factors.size(); ++i) coordinates(s.factors[i], q.parts[i], out);
                   },
                   [&](const auto&) {
                       const auto& t = as_torus(p, coordinate_count(sys));
                       out.insert(out.end(), t.coords.begin(), t.coords.end());
                   },
               },
               sys);
}

Coords coordinates(const SystemSpec& sys, const Point& p) {
    Coords out;
    coordinates(sys, p, out);
    return out;
}

double point_distance(const SystemSpec& sys, const Point& p, const Point& q) {
    return std::visit(Overloaded{
                          [&](const BernoulliShift& s) {
                              const auto a = window(s, as_shift(p), 16);
                              const auto b = window(s, as_shift(q), 16);
                              return a.symbols == b.symbols ? 0.0 : 1.0;
                          },
                          [&](const ProductSystem& s) {
                              const auto& a = as_product(p, s.factors.size());
                              const auto& b = as_product(q, s.factors.size());
                              double d = 0.0;
                              for (std::size_t i = 0; i < s.factors.size(); ++i)
                                  d = std::max(d, point_distance(s.factors[i], a.parts[i], b.parts[i]));
                              return d;
                          },
                          [&](const auto&) {
                              const Coords a = coordinates(sys, p);
                              const Coords b = coordinates(sys, q);
                              double d = 0.0;
                              for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, circle_distance(a[i], b[i]));
                              return d;
                          },
                      },
                      sys);
}

// ---------------------------------------------------------------------------

Observable constant_one(int dims) { return Character{std::vector<int>(static_cast<std::size_t>(dims), 0)}; }

Observable coordinate_character(int dims, int coord, int freq) {
    if (coord < 0 || coord >= dims) throw DimensionMismatch("coordinate_character: coordinate out of range");
    std::vector<int> m(static_cast<std::size_t>(dims), 0);
    m[static_cast<std::size_t>(coord)] = freq;
    return Character{std::move(m)};
}

Observable symbol_indicator(int m, int s) {
    if (m < 2 || s < 0 || s >= m) throw std::invalid_argument("symbol_indicator: symbol outside alphabet");
    return BoxIndicator{{Interval{static_cast<double>(s) / m, static_cast<double>(s + 1) / m}}};
}

int observable_dims(const Observable& f) {
    return std::visit(Overloaded{
                          [](const Character& c) { return static_cast<int>(c.freq.size()); },
                          [](const BoxIndicator& b) { return static_cast<int>(b.intervals.size()); },
                          [](const Tabulated& t) { return static_cast<int>(t.resolution.size()); },
                      },
                      f);
}

double sup_norm(const Observable& f) {
    return std::visit(Overloaded{
                          [](const Character&) { return 1.0; },
                          [](const BoxIndicator&) { return 1.0; },
                          [](const Tabulated& t) {
                              double m = 0.0;
                              for (auto v : t.values) m = std::max(m, std::abs(v));
                              return m;
                          },
                      },
                      f);
}

std::string describe(const Observable& f) {
    return std::visit(Overloaded{
                          [](const Character& c) {
                              std::string s = "char:";
                              for (std::size_t i = 0; i < c.freq.size(); ++i)
                                  s += (i ? "," : "") + std::to_string(c.freq[i]);
                              return s;
                          },
                          [](const BoxIndicator& b) {
                              std::string s = "box:";
                              for (std::size_t i = 0; i < b.intervals.size(); ++i)
                                  s += (i ? "," : "") + fmt(b.intervals[i].lo) + "-" + fmt(b.intervals[i].hi);
                              return s;
                          },
                          [](const Tabulated& t) {
                              std::string s = "table:";
                              for (std::size_t i = 0; i < t.resolution.size(); ++i)
                                  s += (i ? "x" : "") + std::to_string(t.resolution[i]);
                              return s;
                          },
                      },
                      f);
}

Complex evaluate(const Observable& f, std::span<const double> x) {
    return std::visit(Overloaded{
                          [&](const Character& c) {
                              Phase angle;
                              for (std::size_t i = 0; i < c.freq.size(); ++i) {
                                  if (c.freq[i] != 0) angle += c.freq[i] * Phase::from_double(x[i]);
                              }
                              if (angle.bits() == 0) return Complex{1.0, 0.0};
                              const double theta = 2.0 * std::numbers::pi * std::ldexp(static_cast<double>(angle.bits()), -64);
                              return Complex{std::cos(theta), std::sin(theta)};
                          },
                          [&](const BoxIndicator& b) {
                              for (std::size_t i = 0; i < b.intervals.size(); ++i) {
                                  if (!(x[i] >= b.intervals[i].lo && x[i] < b.intervals[i].hi)) return Complex{0.0, 0.0};
                              }
                              return Complex{1.0, 0.0};
                          },
                          [&](const Tabulated& t) {
                              std::size_t idx = 0;
                              for (std::size_t i = 0; i < t.resolution.size(); ++i) {
                                  const int r = t.resolution[i];
                                  const int cell = std::min(r - 1, static_cast<int>(x[i] * r));
                                  idx = idx * static_cast<std::size_t>(r) + static_cast<std::size_t>(cell);
                              }
                              return t.values[idx];
                          },
                      },
                      f);
}

void check_observable(const SystemSpec& sys, const Observable& f) {
    const int want = coordinate_count(sys);
    if (observable_dims(f) != want)
        throw DimensionMismatch("observable " + describe(f) + " has " + std::to_string(observable_dims(f)) +
                                " coordinates, space has " + std::to_string(want));
    if (const auto* t = std::get_if<Tabulated>(&f)) {
        std::size_t cells = 1;
        for (int r : t->resolution) {
            if (r < 1) throw std::invalid_argument("tabulated observable: resolution must be positive");
            cells *= static_cast<std::size_t>(r);
        }
        if (cells != t->values.size()) throw std::invalid_argument("tabulated observable: value count mismatch");
    }
    if (const auto* b = std::get_if<BoxIndicator>(&f)) {
        for (const auto& iv : b->intervals)
            if (!(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0))
                throw std::invalid_argument("box indicator: interval must lie in [0,1]");
    }
}

Complex evaluate(const SystemSpec& sys, const Observable& f, const Point& p) {
    Coords c;
    coordinates(sys, p, c);
    if (observable_dims(f) != static_cast<int>(c.size())) check_observable(sys, f);
    return evaluate(f, std::span<const double>(c.data(), c.size()));
}

}  // namespace sstlab
