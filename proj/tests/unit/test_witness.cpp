#include "sqavg/witness.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sqavg;

namespace {

Rat brute_sup(const StepFunction& f, std::int64_t cell, std::int64_t N_max)
{
    const std::int64_t C = f.cells(), R = f.resolution();
    Rat best(-1), sum(0);
    for (std::int64_t N = 1; N <= N_max; ++N) {
        sum += f.at_cell(mod_floor(cell + (N * N % f.period()) * R, C));
        const Rat avg = sum / Rat(N);
        if (avg > best) best = avg;
    }
    return best;
}

}  // namespace

TEST(Witness, SupOfConstantIsAttainedAtOne)
{
    const auto f = StepFunction::constant(Rat(3, 7));
    const auto s = sup_average_all(f, 0);
    EXPECT_EQ(s.value, Rat(3, 7));
    EXPECT_EQ(s.argmax, 1);
}

TEST(Witness, SupMatchesBruteForce)
{
    std::mt19937_64 rng(8);
    for (int it = 0; it < 40; ++it) {
        const std::int64_t P = 1 + static_cast<std::int64_t>(rng() % 25), R = 1 + static_cast<std::int64_t>(rng() % 2);
        std::vector<sqavg::Run> runs;
        for (std::int64_t c = 0; c < P * R; ++c) runs.push_back({c, c + 1, make_rat(static_cast<std::int64_t>(rng() % 4), 3)});
        const auto f = StepFunction::from_runs(P, R, runs);
        for (std::int64_t x = 0; x < f.cells(); ++x) {
            // the sup over all N is reached within one period of k^2
            const auto s = sup_average_all(f, x);
            ASSERT_EQ(s.value, brute_sup(f, x, 6 * P + 5)) << "P=" << P << " x=" << x;
            ASSERT_EQ(sup_average(f, x, 5).value, brute_sup(f, x, 5));
            ASSERT_LE(s.argmax, P);
        }
    }
}

TEST(Witness, IndicatorOnPeriodFive)
{
    // f = 1 on [0, 1) + 5Z; squares mod 5 are {0, 1, 4}
    const auto f = StepFunction::indicator(PeriodicIntSet::unit_range(5, 0, 1));
    EXPECT_EQ(sup_average_all(f, 0).value, Rat(1, 5));   // k^2 = 0 first at k = 5
    EXPECT_EQ(sup_average_all(f, 1).value, Rat(2, 3));   // hits at k = 2, 3
    EXPECT_EQ(sup_average_all(f, 4).value, Rat(1));      // hit at k = 1
    EXPECT_EQ(sup_average_all(f, 2).value, Rat(0));      // 3 is not a square mod 5
}

TEST(Witness, WeakTypeRatio)
{
    const auto one = StepFunction::constant(Rat(1));
    EXPECT_EQ(weak11_ratio(one, Rat(1, 2)), Rat(1, 2));
    EXPECT_EQ(weak11_ratio(one, Rat(2)), Rat(0));
    EXPECT_EQ(weak11_ratio(StepFunction::constant(Rat(0)), Rat(1)), Rat(0));
    const auto f = StepFunction::indicator(PeriodicIntSet::unit_range(5, 0, 1));
    // sup > 0 exactly where x + {0,1,4} meets 0 mod 5: x in {0, 1, 4}
    EXPECT_EQ(sup_level_measure(f, Rat(0)), Rat(3, 5));
}

TEST(Witness, WindowLength)
{
    EXPECT_EQ(witness_N(BigInt(2), BigInt(3), Rat(2)), BigInt(7));
    EXPECT_EQ(witness_N(BigInt(2), BigInt(3), Rat(1000)), BigInt(2 + 999 * 6 - 1));
}

TEST(Witness, BuildAndSweepBaseFamily)
{
    FamilyParams p;
    const auto fam = make_base_family(p, 1, 1, 4);
    const auto w = build_witness(fam, p);
    EXPECT_EQ(w.integral_f, kWitnessBoost);
    EXPECT_EQ(w.integral_bound, Rat(2));
    const auto sw = witness_sweep(w, fam);
    EXPECT_GT(sw.units, 0);
    EXPECT_EQ(sw.failed, 0) << sw.witness;
    EXPECT_GT(sw.min_margin, Rat(0));
}

TEST(Witness, IntegralBoundIsEnforced)
{
    FamilyParams p;
    p.Gamma = Rat(5, 2);
    const auto fam = make_base_family(p, 2, 1, 4);   // 1.01 >= 1 * 2^0
    EXPECT_THROW(build_witness(fam, p), ContractError);
}
