#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sstlab/zoo.hpp"

using namespace sstlab;

namespace {

oracle::IMat to_oracle(const IntMatrix& m) {
    oracle::IMat r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i].assign(m[i].begin(), m[i].end());
    return r;
}

}  // namespace

TEST(DilationMatrix, ThreeDimensionalClosedForm) {
    // τ_n(x, y, z) = (n² x, n y + C(n,2) x, z).
    for (std::int64_t n = 1; n <= 64; ++n) {
        const IntMatrix m = derive_dilation_matrix(3, n);
        const oracle::IMat expected = {{n * n, 0, 0}, {n * (n - 1) / 2, n, 0}, {0, 0, 1}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_TRUE(m[i][j] == expected[i][j]) << "n=" << n << " " << i << j;
    }
}

TEST(DilationMatrix, IntertwinesSkewAndItsPowers) {
    for (int d = 2; d <= 10; ++d) {
        const oracle::IMat a = oracle::shift_sum(d);
        for (int n = 1; n <= 20; ++n) {
            const oracle::IMat m = to_oracle(derive_dilation_matrix(d, n));
            EXPECT_TRUE(oracle::mul(a, m) == oracle::mul(m, oracle::power(a, n))) << "d=" << d << " n=" << n;
            oracle::i128 top = 1;
            for (int i = 0; i < d - 1; ++i) top *= n;
            EXPECT_TRUE(m[0][0] == top);
            EXPECT_TRUE(m[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(d - 1)] == 1);
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) EXPECT_TRUE(m[i][j] == 0);
        }
    }
}

TEST(DilationMatrix, RejectsOutOfRange) {
    EXPECT_THROW(derive_dilation_matrix(1, 2), std::invalid_argument);
    EXPECT_THROW(derive_dilation_matrix(13, 2), std::invalid_argument);
    EXPECT_THROW(derive_dilation_matrix(3, 0), std::invalid_argument);
    EXPECT_THROW(derive_dilation_matrix(3, 65), std::invalid_argument);
}

TEST(Tau, SkewDilationScalesFirstCoordinate) {
    TorusPoint p;
    p.coords = {0.375, 0.5};
    const auto q = std::get<TorusPoint>(tau(Skew2Tau{}, 3, p));
    EXPECT_EQ(q.coords[0], 0.125);
    EXPECT_EQ(q.coords[1], 0.5);
}

TEST(Tau, SequenceDilationSubsamples) {
    const SystemSpec sys = bernoulli_shift({0.5, 0.5});
    const auto& b = std::get<BernoulliShift>(sys);
    Rng rng(21);
    const auto p = std::get<ShiftPoint>(sample_invariant(sys, rng));
    const auto q = std::get<ShiftPoint>(tau(SeqDilation{}, 3, p));
    for (int i = -10; i <= 10; ++i) EXPECT_EQ(symbol_at(b, q, i), symbol_at(b, p, 3 * i));

    const SymbolWindow w = window(b, p, 12);
    const SymbolWindow v = tau(SeqDilation{}, 3, w);
    EXPECT_EQ(v.radius, 4);
    for (int i = -4; i <= 4; ++i) EXPECT_EQ(v.at(i), w.at(3 * i));
}

TEST(Tau, FamilyMustMatchSpace) {
    EXPECT_THROW(check_family(skew2(), AffineDTau{3}), DimensionMismatch);
    EXPECT_THROW(check_family(affine_skew(4), AffineDTau{3}), DimensionMismatch);
    EXPECT_THROW(check_family(rotation(0.1), SeqDilation{}), DimensionMismatch);
    EXPECT_NO_THROW(check_family(affine_skew(4), AffineDTau{4}));
    EXPECT_THROW(default_dilation(rotation(0.1)), std::invalid_argument);
}

TEST(Tau, CommutesWithTheSystem) {
    EXPECT_LE(commutation_check(skew2(), Skew2Tau{}, 64, 500, 1), 1e-10);
    for (int d = 3; d <= 6; ++d) EXPECT_LE(commutation_check(affine_skew(d), AffineDTau{d}, 64, 500, 2), 1e-10) << d;
    EXPECT_EQ(commutation_check(bernoulli_shift({0.5, 0.5}), SeqDilation{}, 16, 200, 3), 0.0);
}

TEST(Tau, PreservesTheMeasure) {
    const std::vector<Observable> fs = {coordinate_character(2, 0, 1), coordinate_character(2, 1, 1),
                                        BoxIndicator{{{0.0, 0.3}, {0.2, 0.9}}}};
    const auto rep = tau_measure_preserving_check(skew2(), Skew2Tau{}, 3, fs, 20000, 5);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_LE(rep.max_deviation, 4.0 * rep.std_error_at_max + 1e-12);
    EXPECT_NEAR(rep.rows[2].mean_original.real(), 0.21, 0.02);
}
