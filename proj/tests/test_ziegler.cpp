#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sstlab/ziegler.hpp"

using namespace sstlab;

namespace {

const HeisenbergRot kNil{kSqrt2Minus1, kSqrt3Minus1, 0.0};

Observable x1_char(int m) { return coordinate_character(3, 0, m); }

}  // namespace

TEST(Hk, ElementsMatchMatrixOracle) {
    const double u = 0.3, v = 0.7, w = 0.2, t = 0.55;
    const HkSample s = hk_from_parameters(16, u, v, w, t);
    ASSERT_EQ(s.elements.size(), 16u);
    for (int i = 1; i <= 16; ++i) {
        const auto m = oracle::mul(oracle::power(oracle::heis(u, v, w), i), oracle::heis(0, 0, 0.5L * i * (i - 1) * t));
        const auto& y = s.elements[static_cast<std::size_t>(i - 1)];
        EXPECT_NEAR(y.x1, static_cast<double>(m[0][1]), 1e-12);
        EXPECT_NEAR(y.x2, static_cast<double>(m[1][2]), 1e-12);
        EXPECT_NEAR(y.x3, static_cast<double>(m[0][2]), 1e-10);
    }
    EXPECT_THROW(hk_from_parameters(0, u, v, w, t), std::invalid_argument);
    EXPECT_THROW(hk_from_parameters(17, u, v, w, t), std::invalid_argument);
}

TEST(Hk, SampleIsLeftInvariantUnderAFixedElement) {
    // Moments of the coset statistic must not change when every tuple is
    // multiplied by a fixed element h of H_k (here k = 2).
    const HkSample h = hk_from_parameters(2, 0.17, 0.61, 0.33, 0.8);
    const std::vector<Observable> probes = {Character{{1, 0, 0}}, Character{{0, 1, 0}}, Character{{1, -1, 0}},
                                            Character{{0, 0, 1}}, BoxIndicator{{{0.0, 0.5}, {0.0, 0.5}, {0.0, 0.5}}}};
    Rng rng(31);
    const int samples = 200000;
    std::vector<Complex> plain(probes.size() * 2), moved(probes.size() * 2);
    for (int s = 0; s < samples; ++s) {
        const HkSample y = hk_sample(2, rng);
        for (std::size_t i = 0; i < 2; ++i) {
            const HeisenbergPoint a = reduce(y.elements[i]);
            const HeisenbergPoint b = reduce(heisenberg_mul(h.elements[i], y.elements[i]));
            const double ca[3] = {a.x1, a.x2, a.x3}, cb[3] = {b.x1, b.x2, b.x3};
            for (std::size_t p = 0; p < probes.size(); ++p) {
                plain[p * 2 + i] += evaluate(probes[p], std::span<const double>(ca, 3));
                moved[p * 2 + i] += evaluate(probes[p], std::span<const double>(cb, 3));
            }
        }
    }
    for (std::size_t q = 0; q < plain.size(); ++q)
        EXPECT_LE(std::abs(plain[q] - moved[q]) / samples, 5.0 / std::sqrt(double(samples)) * 2.0) << q;
}

TEST(Ziegler, ConstantObservablesGiveOne) {
    const std::vector<Observable> fs(4, constant_one(3));
    const auto rhs = ziegler_rhs(kNil, fs, MonteCarlo{1, 1000});
    EXPECT_EQ(rhs.value, Complex(1.0, 0.0));
}

TEST(Ziegler, CharacterOnTheBaseTorus) {
    // f_i = e(m_i x1): the left side is ∫ e(Σ m_i (x1 + i n a1)); with
    // Σ m_i = Σ i m_i = 0 it equals 1 for every n.
    const std::vector<Observable> fs = {x1_char(1), x1_char(-2), x1_char(1)};
    const auto rhs = ziegler_rhs(kNil, fs, MonteCarlo{2, 20000});
    EXPECT_NEAR(rhs.value.real(), 1.0, 1e-9);
    ZieglerLhsOptions o;
    o.N = 2000;
    o.mode = LhsMode::FromPoint;
    o.start = HeisenbergPoint{0.1, 0.2, 0.3};
    const auto lhs = ziegler_lhs(kNil, fs, o);
    EXPECT_NEAR(lhs.estimate.value.real(), 1.0, 1e-9);
    EXPECT_EQ(lhs.estimate.std_error, 0.0);
}

TEST(Ziegler, IntegratedAndPointwiseAgreeWithTheLimit) {
    const std::vector<Observable> fs = {BoxIndicator{{{0.0, 0.5}, {0.0, 0.5}, {0.0, 1.0}}},
                                        BoxIndicator{{{0.25, 0.75}, {0.0, 1.0}, {0.0, 0.5}}},
                                        Character{{0, 1, 1}}};
    const auto rhs = ziegler_rhs(kNil, fs, MonteCarlo{3, 100000});
    ZieglerLhsOptions o;
    o.N = 20000;
    o.mode = LhsMode::Integrated;
    o.starts = MonteCarlo{4, 2000};
    o.draws = 32;
    const auto lhs = ziegler_lhs(kNil, fs, o);
    EXPECT_LE(std::abs(lhs.estimate.value - rhs.value), 0.02 + 4.0 * (lhs.estimate.std_error + rhs.std_error));
}

TEST(Ziegler, FixedStartRightSide) {
    const HeisenbergPoint x{0.3, 0.6, 0.1};
    const std::vector<Observable> fs = {constant_one(3), Character{{1, 0, 0}}};
    // ∫ e(x1 + v) dv over v uniform is 0.
    const auto rhs = ziegler_rhs(kNil, fs, MonteCarlo{5, 40000}, x);
    EXPECT_LE(std::abs(rhs.value), 4.0 * rhs.std_error + 1e-12);
}

TEST(Ziegler, ValidatesArguments) {
    EXPECT_THROW(ziegler_rhs(kNil, {}, MonteCarlo{1, 10}), std::invalid_argument);
    const std::vector<Observable> wrong = {coordinate_character(2, 0, 1)};
    EXPECT_THROW(ziegler_rhs(kNil, wrong, MonteCarlo{1, 10}), DimensionMismatch);
    const std::vector<Observable> many(18, constant_one(3));
    EXPECT_THROW(ziegler_rhs(kNil, many, MonteCarlo{1, 10}), std::invalid_argument);
}

TEST(DilationInvariance, RotationCharacters) {
    const std::vector<Observable> fs = {coordinate_character(1, 0, 1), coordinate_character(1, 0, -2),
                                        coordinate_character(1, 0, 1)};
    const auto rep = dilation_invariance_check(rotation(kSqrt2Minus1), 3, fs, 5000, 0, MonteCarlo{6, 32});
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.deviation, 1e-9);
}

TEST(DilationInvariance, RejectsSystemsThatAreNotTotallyErgodic) {
    const std::vector<Observable> fs = {coordinate_character(2, 1, 1), coordinate_character(2, 1, -1)};
    EXPECT_THROW(dilation_invariance_check(skew2(), 2, fs, 100, 0, MonteCarlo{1, 10}), std::invalid_argument);
    EXPECT_FALSE(is_totally_ergodic(affine_skew(3)));
    EXPECT_TRUE(is_totally_ergodic(bernoulli_shift({0.5, 0.5})));
}

TEST(UniqueErgodicity, OrbitAveragesMatchSpaceAverage) {
    const Observable f = BoxIndicator{{{0.0, 0.5}, {0.0, 0.5}, {0.0, 0.5}}};
    const auto rep = unique_ergodicity_check(kNil, f, 100000, 4, 7, 100000);
    EXPECT_EQ(rep.starts.size(), 4u);
    EXPECT_NEAR(rep.space_average.value.real(), 0.125, 4.0 * rep.space_average.std_error);
    EXPECT_LE(rep.max_discrepancy, 0.01);
    EXPECT_TRUE(rep.all_stable);
}
