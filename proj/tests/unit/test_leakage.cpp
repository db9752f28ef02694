#include "sqavg/leakage.hpp"

#include <gtest/gtest.h>

using namespace sqavg;

namespace {

std::vector<ScheduleStep> schedule(std::initializer_list<std::vector<std::uint64_t>> qs)
{
    std::vector<ScheduleStep> out;
    for (const auto& q : qs) {
        ScheduleStep s;
        s.q_primes = q;
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST(Leakage, SmallRunIdentitiesHold)
{
    FamilyParams p;
    p.Gamma = Rat(5, 2);
    const auto run = leakage_run(p, 2, 0, GammaParam::from_c(2), LeakageConfig{}, schedule({{101, 103}, {107, 109}}));
    ASSERT_GE(run.states.size(), 2u);
    const auto& last = run.states.back();
    for (const auto& lev : last.levels)
        for (const auto& id : lev.identities) EXPECT_TRUE(id.pass) << "L=" << lev.L << " " << id.name << ": " << id.detail;
    // lambda(F_L) = prod r_l
    Rat prod(1);
    for (std::size_t i = 1; i < last.r.size(); ++i) prod *= last.r[i];
    EXPECT_EQ(last.F_measures.back(), last.F_measures.front() * prod);
    // F shrinks strictly
    for (std::size_t i = 1; i < last.F_measures.size(); ++i) EXPECT_LT(last.F_measures[i], last.F_measures[i - 1]);
}

TEST(Leakage, TauPrimeChoice)
{
    FamilyParams p;
    const auto s = leakage_init(p, 2, 0, GammaParam::from_c(2), LeakageConfig{});
    const auto q = SquareFreeModulus::from_primes({101, 103});
    const BigInt t = choose_tau_prime(s, BigInt(0), q);
    EXPECT_GE(t, s.tau * 4);
    EXPECT_TRUE(s.pools.admissible(t));
    EXPECT_EQ(gcd(t, q.q()), 1);
}

TEST(Leakage, ConfigErrors)
{
    FamilyParams p;
    p.Gamma = Rat(5, 2);
    EXPECT_THROW(leakage_init(p, 2, 1, GammaParam::from_c(2), LeakageConfig{}), ConfigError);
    EXPECT_THROW(leakage_init(p, 2, -1, GammaParam::from_c(2), LeakageConfig{}), ConfigError);
    const auto s = leakage_init(p, 2, 0, GammaParam::from_c(2), LeakageConfig{});
    // kappa below c
    EXPECT_THROW(leakage_step(s, BigInt(1000003), SquareFreeModulus::from_primes({101})), ConfigError);
    // tau' not prime
    EXPECT_THROW(leakage_step(s, BigInt(1000001), SquareFreeModulus::from_primes({101, 103})), ConfigError);
}
