#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "dscex/errors.hpp"
#include "dscex/operator.hpp"
#include "dscex/sampling.hpp"

using namespace dscex;

TEST(FloorLog3, Examples) {
    EXPECT_EQ(floor_log3(1), 0u);
    EXPECT_EQ(floor_log3(26), 2u);
    EXPECT_EQ(floor_log3(27), 3u);
    std::uint64_t p30 = 1;
    for (int i = 0; i < 30; ++i) p30 *= 3;
    EXPECT_EQ(floor_log3(p30), 30u);
    EXPECT_EQ(floor_log3(p30 - 1), 29u);
    EXPECT_THROW((void)floor_log3(0), InvalidArgument);
}

TEST(FloorLog3, ExactAtEveryPowerBoundary) {
    std::uint64_t p = 1;
    for (unsigned t = 0; t <= 40; ++t, p *= 3) {
        EXPECT_EQ(floor_log3(p), t);
        EXPECT_EQ(floor_log3(p + 1), t);
        if (t > 0) {
            EXPECT_EQ(floor_log3(p - 1), t - 1);
        }
    }
    EXPECT_EQ(floor_log3(std::numeric_limits<std::uint64_t>::max()), 40u);
}

TEST(IsPowerOf3, Examples) {
    EXPECT_TRUE(is_power_of_3(1));
    EXPECT_TRUE(is_power_of_3(9));
    EXPECT_FALSE(is_power_of_3(10));
    std::uint64_t p = 1;
    for (int i = 0; i < 25; ++i) p *= 3;
    EXPECT_TRUE(is_power_of_3(p));
    EXPECT_FALSE(is_power_of_3(p + 1));
    for (std::uint64_t x = 1; x < 5000; ++x) ASSERT_EQ(is_power_of_3(x), oracle::is_power_of_3(x)) << x;
}

TEST(SignFlipCount, Examples) {
    EXPECT_EQ(sign_flip_count(1, 2), 1u);
    EXPECT_EQ(sign_flip_count(7, 0), 0u);
    EXPECT_EQ(sign_flip_count(2, 7), 2u);
}

TEST(SignFlipCount, EqualsEnumerationUpTo2000) {
    for (std::uint64_t n = 0; n <= 2000; ++n) {
        std::uint64_t count = 0;
        ASSERT_EQ(sign_flip_count(n, 0), 0u);
        for (std::uint64_t m = 1; m <= 2000; ++m) {
            if (oracle::is_power_of_3(n + m)) ++count;
            ASSERT_EQ(sign_flip_count(n, m), count) << "n=" << n << " m=" << m;
        }
    }
}

TEST(SignFlipCount, OverflowThrows) {
    EXPECT_THROW((void)sign_flip_count(std::numeric_limits<std::uint64_t>::max(), 1), IndexOverflow);
}

TEST(Sigma, Examples) {
    EXPECT_EQ(sigma(1, 1), 1);
    EXPECT_EQ(sigma(0, 1), -1);
    EXPECT_EQ(sigma(1, 2), -1);
}

TEST(Sigma, CocycleIdentity) {
    Rng rng = sample_rng(5, 0);
    for (int i = 0; i < 20000; ++i) {
        const auto n = static_cast<std::uint64_t>(uniform_int(rng, 0, 100000));
        const auto m = static_cast<std::uint64_t>(uniform_int(rng, 0, 100000));
        const auto k = static_cast<std::uint64_t>(uniform_int(rng, 0, 100000));
        ASSERT_EQ(sigma(n, m + k), sigma(n, m) * sigma(n + m, k));
    }
}

TEST(Psi, PowersOfThreeIncludingOne) {
    EXPECT_EQ(psi(0), 1);
    EXPECT_EQ(psi(1), -1);
    EXPECT_EQ(psi(2), 1);
    EXPECT_EQ(psi(3), -1);
    EXPECT_EQ(psi(81), -1);
    EXPECT_EQ(psi(82), 1);
}

TEST(ApplyS, ConstantOne) {
    const FactorSpace space = FactorSpace::uniform(1);
    const WindowedFunction sv = apply_S(space, CellFunction::constant(1, 1));
    EXPECT_EQ(sv.function.value({0, 0}), Complex(-1));
    EXPECT_EQ(sv.function.value({0, 1}), Complex(1));
    EXPECT_EQ(sv.function.value({0, 2}), Complex(-1));
    EXPECT_TRUE(sv.bounded());
}

TEST(ApplyS, ZeroStaysZero) {
    const FactorSpace space = FactorSpace::uniform(2);
    const WindowedFunction sv = apply_S(space, CellFunction::zero(2));
    EXPECT_EQ(sv.function, CellFunction::zero(2));
    EXPECT_FALSE(sv.bounded());
}

TEST(ApplyS, FiniteSupport) {
    const FactorSpace space = FactorSpace::uniform(1);
    const WindowedFunction sv = apply_S(space, CellFunction({{{5, 7}, ValueTail::zero()}}));
    EXPECT_EQ(sv.function.value({0, 0}), Complex(-7));
    for (std::uint64_t n = 1; n < 10; ++n) EXPECT_EQ(sv.function.value({0, n}), Complex(0));
    EXPECT_FALSE(sv.bounded());
}

TEST(ApplyS, AgreesWithIterateBelowTheWindow) {
    for (std::uint64_t i = 0; i < 200; ++i) {
        Rng rng = sample_rng(6, i);
        const CellFunction v = random_cell_function(rng, 2, 30);
        const FactorSpace space = FactorSpace::uniform(2);
        const WindowedFunction sv = apply_S(space, v, static_cast<std::uint64_t>(uniform_int(rng, 0, 40)));
        const std::uint64_t limit = std::min<std::uint64_t>(sv.valid_below, 200);
        for (ChainId j = 0; j < 2; ++j) {
            for (std::uint64_t n = 0; n < limit; ++n) {
                ASSERT_EQ(sv.function.exact_value({j, n}), iterate_value_exact(v, {j, n}, 1)) << i << " " << n;
            }
        }
    }
}

TEST(IterateValue, Examples) {
    const CellFunction one = CellFunction::constant(1, 1);
    EXPECT_EQ(iterate_value(one, {0, 1}, 2), Complex(-1));
    EXPECT_EQ(iterate_value(one, {0, 0}, 8), Complex(1));
    EXPECT_THROW((void)iterate_value(one, {0, 0}, 0), InvalidArgument);
}

TEST(IterateValue, MatchesRepeatedShifting) {
    for (std::uint64_t i = 0; i < 40; ++i) {
        Rng rng = sample_rng(7, i);
        const CellFunction v = random_cell_function(rng, 1, 40);
        const auto u = oracle::dense_exact(v, 0, 160);
        for (int s = 0; s < 20; ++s) {
            const auto n = static_cast<std::uint64_t>(uniform_int(rng, 0, 40));
            const auto k = static_cast<std::uint64_t>(uniform_int(rng, 1, 100));
            ASSERT_EQ(iterate_value_exact(v, {0, n}, k), oracle::iterate_by_shifting(u, n, k));
        }
    }
}

TEST(IterateValue, ShiftRelationBetweenStartCells) {
    for (std::uint64_t i = 0; i < 30; ++i) {
        Rng rng = sample_rng(8, i);
        const CellFunction v = random_cell_function(rng, 1, 50);
        for (int s = 0; s < 200; ++s) {
            const auto m = static_cast<std::uint64_t>(uniform_int(rng, 1, 100));
            const auto n = static_cast<std::uint64_t>(uniform_int(rng, 0, static_cast<std::int64_t>(m) - 1));
            const auto k = static_cast<std::uint64_t>(uniform_int(rng, 1, 1000));
            ExactComplex rhs = iterate_value_exact(v, {0, n}, k + m - n);
            if (sign_flip_count(n, m - n) % 2 == 1) rhs = -rhs;
            ASSERT_EQ(iterate_value_exact(v, {0, m}, k), rhs);
        }
    }
}

TEST(SignPattern, MatchesPsi) {
    const WindowedFunction p = sign_pattern_function(2, 100);
    for (ChainId j = 0; j < 2; ++j) {
        for (std::uint64_t n = 0; n < 100; ++n) EXPECT_EQ(p.function.value({j, n}), Complex(oracle::psi(n)));
    }
}
