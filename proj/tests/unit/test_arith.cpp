#include "sqavg/modulus.hpp"
#include "sqavg/rational.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace sqavg;

namespace {

bool trial_prime(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::int64_t brute_sigma(std::int64_t q)
{
    std::set<std::int64_t> s;
    for (std::int64_t k = 0; k < q; ++k) s.insert(k * k % q);
    return static_cast<std::int64_t>(s.size());
}

}  // namespace

TEST(Rational, ParseAndPrint)
{
    EXPECT_EQ(to_string(parse_rational("6/4")), "3/2");
    EXPECT_EQ(to_string(parse_rational("7")), "7/1");
    EXPECT_EQ(to_string(parse_rational("0.125")), "1/8");
    EXPECT_EQ(to_string(parse_rational("-2/6")), "-1/3");
    EXPECT_THROW(parse_rational("1/0"), ConfigError);
    EXPECT_THROW(parse_rational("abc"), ConfigError);
}

TEST(Rational, FloorCeilPow)
{
    EXPECT_EQ(floor_of(make_rat(-7, 2)), big(-4));
    EXPECT_EQ(ceil_of(make_rat(-7, 2)), big(-3));
    EXPECT_EQ(ceil_of(make_rat(6, 3)), big(2));
    EXPECT_EQ(pow2(-3), make_rat(1, 8));
    EXPECT_EQ(pow2(5), make_rat(32));
    EXPECT_EQ(mod_floor(-1, 5), 4);
    EXPECT_EQ(checked_lcm(4, 6), 12);
    EXPECT_THROW(checked_mul(std::int64_t{1} << 40, std::int64_t{1} << 40), ScaleError);
}

TEST(Modulus, PrimalityMatchesTrialDivision)
{
    for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(is_prime(n), trial_prime(n)) << n;
    EXPECT_TRUE(is_prime(18446744073709551557ULL));
    EXPECT_FALSE(is_prime(3215031751ULL));   // strong pseudoprime to bases 2,3,5,7
    EXPECT_EQ(next_prime(1000), 1009u);
}

TEST(Modulus, SquareFreeValidation)
{
    EXPECT_THROW(SquareFreeModulus::from_value(9), ConfigError);
    EXPECT_THROW(SquareFreeModulus::from_value(10), ConfigError);
    const auto q = SquareFreeModulus::from_value(105);
    EXPECT_EQ(q.kappa(), 3);
    EXPECT_EQ(q.primes(), (std::vector<std::uint64_t>{3, 5, 7}));
}

TEST(Modulus, SigmaMatchesBruteForce)
{
    for (std::int64_t q = 3; q < 3000; q += 2) {
        bool sf = true;
        for (auto p : prime_factors(static_cast<std::uint64_t>(q)))
            if (q % static_cast<std::int64_t>(p * p) == 0) sf = false;
        if (!sf) continue;
        const auto m = SquareFreeModulus::from_value(static_cast<std::uint64_t>(q));
        ASSERT_EQ(sigma(m), big(brute_sigma(q))) << q;
        ASSERT_EQ(static_cast<std::int64_t>(lambda0(m).residues.size()), brute_sigma(q));
    }
}

TEST(Modulus, EpsilonAndUnits)
{
    const auto q = SquareFreeModulus::from_value(3 * 5 * 7);
    std::set<std::int64_t> sq;
    for (std::int64_t k = 0; k < 105; ++k) sq.insert(k * k % 105);
    std::int64_t units = 0;
    for (std::int64_t n = -210; n < 210; ++n) {
        ASSERT_EQ(epsilon(n, q), sq.count(mod_floor(n, 105)) ? 1 : 0) << n;
    }
    for (auto r : lambda0_prime(q).residues) {
        EXPECT_TRUE(std::gcd(r, std::int64_t{105}) == 1);
        ++units;
    }
    EXPECT_EQ(big(units), sigma_prime(q));
}

TEST(Modulus, TwoToKappaSolutions)
{
    for (std::uint64_t qv : {15u, 105u, 143u, 1155u}) {
        const auto q = SquareFreeModulus::from_value(qv);
        const auto n = static_cast<std::int64_t>(qv);
        std::vector<int> cnt(static_cast<std::size_t>(n), 0);
        for (std::int64_t x = 0; x < n; ++x) ++cnt[static_cast<std::size_t>(x * x % n)];
        for (auto r : lambda0_prime(q).residues) ASSERT_EQ(cnt[static_cast<std::size_t>(r)], 1 << q.kappa());
    }
}

TEST(Modulus, LegendreIsEulerCriterion)
{
    for (std::uint64_t p : {3u, 5u, 7u, 11u, 101u, 1009u}) {
        for (std::int64_t n = -50; n < 200; ++n) {
            const auto a = static_cast<std::uint64_t>(mod_floor(n, static_cast<std::int64_t>(p)));
            int expect = 0;
            if (a != 0) expect = powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
            ASSERT_EQ(legendre(n, p), expect);
        }
    }
}

TEST(Modulus, CharacterSumMatchesBruteAndBound)
{
    std::mt19937_64 rng(7);
    for (std::uint64_t tau : {3u, 7u, 101u, 499u, 4999u}) {
        for (int i = 0; i < 200; ++i) {
            const std::int64_t n = static_cast<std::int64_t>(rng() % 20000) - 10000;
            const std::int64_t l = 1 + static_cast<std::int64_t>(rng() % (3 * tau));
            std::int64_t s = 0;
            for (std::int64_t j = n; j < n + l; ++j) s += legendre(j, tau);
            ASSERT_EQ(char_interval_sum(n, l, tau), s);
            ASSERT_LE(std::llabs(s), polya_vinogradov_bound(tau));
        }
    }
    EXPECT_EQ(polya_vinogradov_bound(101), static_cast<std::int64_t>(std::ceil(6 * std::sqrt(101.0) * std::log(101.0))));
}
