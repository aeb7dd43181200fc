#pragma once

// Exact arithmetic on the circle R/Z.
//
// A Phase stores a point of R/Z as a 64-bit binary fraction of a turn, so
// addition and multiplication by integers are exact modulo 1 (they wrap
// modulo 2^64). Torus and nilmanifold maps are evaluated in this
// representation and only converted back to double at the API boundary.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sstlab {

using u128 = unsigned __int128;

/// Reduces x modulo 1 into the half-open interval [0, 1).
/// Exact 1.0 (including the result of rounding tiny negatives) maps to 0.0.
inline double mod1(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("mod1: non-finite coordinate");
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

class Phase {
public:
    constexpr Phase() = default;

    static constexpr Phase from_bits(std::uint64_t bits) {
        Phase p;
        p.bits_ = bits;
        return p;
    }

    /// Bits below 2^-64 are truncated.
    static Phase from_double(double x) {
        const double r = mod1(x);
        return from_bits(static_cast<std::uint64_t>(std::ldexp(r, 64)));
    }

    /// Nearest double; a value that rounds up to 1.0 wraps to 0.0.
    double to_double() const {
        double r = std::ldexp(static_cast<double>(bits_), -64);
        if (r >= 1.0) r = 0.0;
        return r;
    }

    constexpr std::uint64_t bits() const { return bits_; }

    constexpr Phase operator+(Phase o) const { return from_bits(bits_ + o.bits_); }
    constexpr Phase operator-(Phase o) const { return from_bits(bits_ - o.bits_); }
    constexpr Phase operator-() const { return from_bits(0 - bits_); }
    constexpr Phase& operator+=(Phase o) { bits_ += o.bits_; return *this; }
    constexpr Phase& operator-=(Phase o) { bits_ -= o.bits_; return *this; }
    constexpr bool operator==(const Phase&) const = default;

    /// Multiplication by an integer given modulo 2^64.
    friend constexpr Phase operator*(std::uint64_t n, Phase p) { return from_bits(n * p.bits_); }
    friend constexpr Phase operator*(std::int64_t n, Phase p) {
        return from_bits(static_cast<std::uint64_t>(n) * p.bits_);
    }
    friend constexpr Phase operator*(int n, Phase p) { return static_cast<std::int64_t>(n) * p; }

private:
    std::uint64_t bits_ = 0;
};

/// frac(x * y) for x, y in [0,1), truncated to 64 bits.
constexpr Phase mul_frac(Phase x, Phase y) {
    return Phase::from_bits(static_cast<std::uint64_t>((u128(x.bits()) * y.bits()) >> 64));
}

/// Circular distance between two points of R/Z, in [0, 1/2].
inline double circle_distance(double x, double y) {
    const double d = mod1(x - y);
    return d > 0.5 ? 1.0 - d : d;
}

/// Multiplicative inverse of an odd number modulo 2^64 (Newton iteration).
constexpr std::uint64_t inverse_mod64(std::uint64_t odd) {
    std::uint64_t x = odd;  // correct to 3 bits
    for (int i = 0; i < 5; ++i) x *= 2 - odd * x;
    return x;
}

/// Binomial coefficient C(n, r) modulo 2^64, exact for every n >= 0.
/// Powers of two are tracked separately so the odd part can be inverted.
constexpr std::uint64_t binom_mod64(std::uint64_t n, unsigned r) {
    if (r > n) return 0;
    if (r == 0) return 1;
    if (r == 1) return n;
    if (r == 2) return static_cast<std::uint64_t>((u128(n) * (n - 1)) >> 1);
    std::uint64_t odd_num = 1, odd_den = 1;
    int twos = 0;
    for (unsigned i = 0; i < r; ++i) {
        std::uint64_t num = n - i;
        std::uint64_t den = i + 1;
        int tz = __builtin_ctzll(num);
        twos += tz;
        odd_num *= num >> tz;
        tz = __builtin_ctzll(den);
        twos -= tz;
        odd_den *= den >> tz;
    }
    if (twos >= 64) return 0;
    return (odd_num * inverse_mod64(odd_den)) << twos;
}

}  // namespace sstlab
