#include "sqavg/step_function.hpp"

#include <gtest/gtest.h>

#include <numeric>

#include <random>

using namespace sqavg;

namespace {

StepFunction random_step(std::mt19937_64& rng, std::int64_t P, std::int64_t R, std::vector<Rat>& vals)
{
    std::vector<Run> runs;
    vals.clear();
    for (std::int64_t c = 0; c < P * R; ++c) {
        const Rat v = make_rat(static_cast<std::int64_t>(rng() % 5), 1 + static_cast<std::int64_t>(rng() % 3));
        vals.push_back(v);
        runs.push_back({c, c + 1, v});
    }
    return StepFunction::from_runs(P, R, runs);
}

}  // namespace

TEST(StepFunction, CellValuesAndMean)
{
    std::mt19937_64 rng(1);
    for (int it = 0; it < 50; ++it) {
        const std::int64_t P = 1 + static_cast<std::int64_t>(rng() % 9), R = 1 + static_cast<std::int64_t>(rng() % 4);
        std::vector<Rat> v;
        const auto f = random_step(rng, P, R, v);
        Rat sum(0);
        for (std::int64_t c = 0; c < P * R; ++c) {
            ASSERT_EQ(f.at_cell(c), v[static_cast<std::size_t>(c)]);
            sum += v[static_cast<std::size_t>(c)];
        }
        EXPECT_EQ(f.mean(), sum / Rat(P * R));
        const auto g = f.rebased(P * 3, R * 2);
        for (std::int64_t c = 0; c < g.cells(); ++c) ASSERT_EQ(g.at_cell(c), v[static_cast<std::size_t>((c / 2) % (P * R))]);
        EXPECT_EQ(g, f);
        EXPECT_EQ(g.minimal(), f.minimal());
    }
}

TEST(StepFunction, SumMinAndOrder)
{
    std::mt19937_64 rng(2);
    for (int it = 0; it < 50; ++it) {
        std::vector<Rat> va, vb;
        const std::int64_t Pa = 1 + static_cast<std::int64_t>(rng() % 6), Pb = 1 + static_cast<std::int64_t>(rng() % 6);
        const auto a = random_step(rng, Pa, 1, va), b = random_step(rng, Pb, 2, vb);
        const auto s = a + b, m = pointwise_min(a, b);
        const std::int64_t P = std::lcm(Pa, Pb);
        bool le = true;
        for (std::int64_t c = 0; c < 2 * P; ++c) {
            const Rat& x = va[static_cast<std::size_t>((c / 2) % Pa)];
            const Rat& y = vb[static_cast<std::size_t>(c % (2 * Pb))];
            ASSERT_EQ(s.rebased(P, 2).at_cell(c), x + y);
            ASSERT_EQ(m.rebased(P, 2).at_cell(c), x < y ? x : y);
            le = le && x <= y;
        }
        EXPECT_EQ(pointwise_le(a, b), le);
        EXPECT_TRUE(pointwise_le(m, a));
    }
}

TEST(StepFunction, AverageAlongSquaresMatchesBruteForce)
{
    std::mt19937_64 rng(3);
    for (int it = 0; it < 40; ++it) {
        std::vector<Rat> v;
        const std::int64_t P = 1 + static_cast<std::int64_t>(rng() % 30);
        const auto f = random_step(rng, P, 1, v);
        const auto coded = int_coded(f);
        for (int t = 0; t < 20; ++t) {
            const std::int64_t x = static_cast<std::int64_t>(rng() % 100), n = static_cast<std::int64_t>(rng() % 50);
            const std::int64_t m = 1 + static_cast<std::int64_t>(rng() % 40);
            Rat s(0);
            for (std::int64_t k = n; k < n + m; ++k) s += v[static_cast<std::size_t>((x + k * k) % P)];
            ASSERT_EQ(avg_along_squares(f, x, n, m), s / Rat(m));
            EXPECT_EQ(Rat(coded_square_sum(coded, x, n, m)) / Rat(coded.den), s);
        }
    }
}

TEST(StepFunction, SubUnitCellsFollowSquares)
{
    // f = 1 on [0, 1/2) + Z: x + k^2 stays in the same half for integer k
    const auto f = StepFunction::from_runs(1, 2, {{0, 1, Rat(1)}});
    EXPECT_EQ(avg_along_squares_cell(f, 0, 1, 9), Rat(1));
    EXPECT_EQ(avg_along_squares_cell(f, 1, 1, 9), Rat(0));
}

TEST(StepFunction, RearrangementCheckMatchesBruteForce)
{
    const auto F = PeriodicIntSet::unit_range(3, 0, 1);
    const Rat rho(1, 4);
    for (std::int64_t tau : {7, 11, 13, 29, 31}) {
        const std::vector<std::int64_t> ns{0, 1, 5, 100};
        const auto rep = rearrangement_check(F, tau, rho, ns);
        const auto Ft = rearrange(F, tau);
        std::int64_t failed = 0;
        for (std::int64_t x = 0; x < tau; ++x)
            for (std::int64_t n : ns) {
                std::int64_t hits = 0;
                for (std::int64_t k = n; k < n + tau; ++k) hits += Ft.contains_unit((x + k * k) % tau);
                if (make_rat(hits, tau) < (1 - rho) * F.measure()) ++failed;
            }
        EXPECT_EQ(rep.failed, failed) << tau;
        EXPECT_EQ(rep.checked, tau * static_cast<std::int64_t>(ns.size()));
    }
}
