#pragma once

// State spaces, concrete measure-preserving systems and bounded observables.
//
// Spaces: tori T^d (coordinates in [0,1)), the Heisenberg nilmanifold G/Γ in
// canonical coordinates, and two-sided sequence spaces carrying a Bernoulli
// measure. Products combine any of these.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "sstlab/rng.hpp"
#include "sstlab/stats.hpp"

namespace sstlab {

using Coords = boost::container::small_vector<double, 8>;

/// Thrown when a point, observable or dilation does not fit the space.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Points

struct TorusPoint {
    Coords coords;
};

/// Coset xΓ of the Heisenberg group, x = [[1,x1,x3],[0,1,x2],[0,0,1]].
/// Canonical points have all coordinates in [0,1). Unreduced values are
/// plain group elements.
struct HeisenbergPoint {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

/// A bi-infinite i.i.d. symbol sequence, generated lazily. The symbol at
/// position i is drawn from the counter-based stream `key` at position
/// offset + stride * i, so shifting and dilating are exact index arithmetic.
struct ShiftPoint {
    std::uint64_t key = 0;
    std::int64_t offset = 0;
    std::int64_t stride = 1;
};

struct Point;
struct ProductPoint {
    std::vector<Point> parts;
};

struct Point : std::variant<TorusPoint, HeisenbergPoint, ShiftPoint, ProductPoint> {
    using variant::variant;
};

/// Finite window x_{-radius..radius} of a symbol sequence.
struct SymbolWindow {
    int radius = 0;
    int alphabet = 2;
    std::vector<int> symbols;  // symbols[i + radius] = x_i

    int at(int i) const;
};

// ---------------------------------------------------------------------------
// Systems

/// x -> x + a
struct Rotation {
    double a = 0.0;
};
/// (x, y) -> (x, y + x)
struct Skew2 {};
/// (x1, ..., xd) -> (x1, x2 + x1, ..., xd + x_{d-1})
struct AffineSkew {
    int d = 2;
};
/// (x, y) -> (x + a, y + x)
struct RotSkew {
    double a = 0.0;
};
/// Left translation by a = (a1, a2, a3) on the Heisenberg nilmanifold.
struct HeisenbergRot {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};
/// Left shift on sequences with i.i.d. coordinates of law p.
struct BernoulliShift {
    std::vector<double> p;
};

struct SystemSpec;
struct ProductSystem {
    std::vector<SystemSpec> factors;
};

struct SystemSpec
    : std::variant<Rotation, Skew2, AffineSkew, RotSkew, HeisenbergRot, BernoulliShift, ProductSystem> {
    using variant::variant;
};

// Validating constructors. Rotation parameters are taken mod 1; the central
// Heisenberg coordinate a3 is taken mod 1 (a1, a2 are kept as given since
// left translation by a and by aγ differ on G/Γ).
SystemSpec rotation(double a);
SystemSpec skew2();
SystemSpec affine_skew(int d);
SystemSpec rot_skew(double a);
SystemSpec heisenberg_rot(double a1, double a2, double a3);
SystemSpec bernoulli_shift(std::vector<double> p);
SystemSpec product(std::vector<SystemSpec> factors);

/// sqrt(2) - 1 and sqrt(3) - 1: the default irrational parameters.
inline const double kSqrt2Minus1 = 0.41421356237309504880;
inline const double kSqrt3Minus1 = 0.73205080756887729353;

std::string describe(const SystemSpec& sys);

/// Number of real coordinates exposed to observables. A sequence space
/// exposes one coordinate: the current symbol s encoded as (s + 1/2) / m.
int coordinate_count(const SystemSpec& sys);

/// True for the variants whose orbit averages converge to the space average
/// from every starting point (rotations by irrationals, RotSkew, nilrotations
/// with independent a1, a2). Assumes the parameters are irrational.
bool is_uniquely_ergodic(const SystemSpec& sys);

// ---------------------------------------------------------------------------
// Heisenberg group

HeisenbergPoint heisenberg_mul(const HeisenbergPoint& g, const HeisenbergPoint& h);
/// g^n = (n g1, n g2, n g3 + C(n,2) g1 g2), unreduced. Requires n >= 0.
HeisenbergPoint heisenberg_pow(const HeisenbergPoint& g, std::int64_t n);

/// Canonical coset representative: right-multiply by (0,-⌊x2⌋,0), then
/// (-⌊x1⌋,0,0), then (0,0,-⌊x3⌋).
HeisenbergPoint reduce(const HeisenbergPoint& raw);
TorusPoint reduce(const TorusPoint& raw);

// ---------------------------------------------------------------------------
// Dynamics

/// T(p). Throws DimensionMismatch if p does not belong to the space.
Point apply(const SystemSpec& sys, const Point& p);
/// T^n(p) for n >= 0, in closed form for every variant.
Point iterate_pow(const SystemSpec& sys, const Point& p, std::int64_t n);
/// One draw from the invariant (Haar / product) measure.
Point sample_invariant(const SystemSpec& sys, Rng& rng);

/// Throws DimensionMismatch unless p has the shape of the system's space.
void check_point(const SystemSpec& sys, const Point& p);

void coordinates(const SystemSpec& sys, const Point& p, Coords& out);
Coords coordinates(const SystemSpec& sys, const Point& p);

int symbol_at(const BernoulliShift& sys, const ShiftPoint& p, std::int64_t i);
SymbolWindow window(const BernoulliShift& sys, const ShiftPoint& p, int radius);

/// Max over coordinates of the circular distance; for sequence points,
/// 0 if the windows of radius 16 agree and 1 otherwise.
double point_distance(const SystemSpec& sys, const Point& p, const Point& q);

// ---------------------------------------------------------------------------
// Observables

/// e^{2πi <freq, coords>}
struct Character {
    std::vector<int> freq;
};
/// Half-open [lo, hi) with 0 <= lo <= hi <= 1.
struct Interval {
    double lo = 0.0, hi = 1.0;
};
struct BoxIndicator {
    std::vector<Interval> intervals;
};
/// Piecewise-constant function on a uniform grid of [0,1)^d; values are
/// row-major with the last coordinate varying fastest.
struct Tabulated {
    std::vector<int> resolution;
    std::vector<Complex> values;
};

struct Observable : std::variant<Character, BoxIndicator, Tabulated> {
    using variant::variant;
};

Observable constant_one(int dims);
/// Character depending only on coordinate `coord`.
Observable coordinate_character(int dims, int coord, int freq);
/// Indicator of symbol s for a sequence space of alphabet size m.
Observable symbol_indicator(int m, int s);

int observable_dims(const Observable& f);
double sup_norm(const Observable& f);
std::string describe(const Observable& f);

Complex evaluate(const Observable& f, std::span<const double> coords);
inline Complex evaluate(const Observable& f, const Coords& coords) {
    return evaluate(f, std::span<const double>(coords.data(), coords.size()));
}
/// f(p), checking the observable against the system's coordinate count.
Complex evaluate(const SystemSpec& sys, const Observable& f, const Point& p);

void check_observable(const SystemSpec& sys, const Observable& f);

}  // namespace sstlab
