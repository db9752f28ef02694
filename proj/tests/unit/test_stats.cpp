#include "sqavg/residue_stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sqavg;

namespace {

std::vector<int> eps_table(std::int64_t q)
{
    std::vector<int> t(static_cast<std::size_t>(q), 0);
    for (std::int64_t k = 0; k < q; ++k) t[static_cast<std::size_t>(k * k % q)] = 1;
    return t;
}

std::vector<int> window_table(std::int64_t q, std::int64_t w)
{
    const auto e = eps_table(q);
    std::vector<int> L(static_cast<std::size_t>(q), 0);
    for (std::int64_t s = 0; s < q; ++s)
        if (e[static_cast<std::size_t>(s)])
            for (std::int64_t j = 0; j < w; ++j) L[static_cast<std::size_t>(mod_floor(j - s, q))] = 1;
    return L;
}

}  // namespace

TEST(ResidueStats, PatternCountMatchesBruteForce)
{
    std::mt19937_64 rng(5);
    for (std::uint64_t qv : {15u, 21u, 105u, 143u, 1155u}) {
        const auto q = SquareFreeModulus::from_value(qv);
        const auto e = eps_table(static_cast<std::int64_t>(qv));
        for (int it = 0; it < 10; ++it) {
            const int K = 1 + static_cast<int>(rng() % 3);
            std::vector<std::int64_t> off;
            while (static_cast<int>(off.size()) < K) {
                const std::int64_t a = static_cast<std::int64_t>(rng() % 40);
                if (std::find(off.begin(), off.end(), a) == off.end()) off.push_back(a);
            }
            const int sign = (rng() & 1) ? 1 : -1;
            const auto all = pattern_counts_all(q, off, sign);
            ASSERT_EQ(all.size(), std::size_t{1} << K);
            std::vector<std::int64_t> brute(all.size(), 0);
            for (std::int64_t n = 0; n < static_cast<std::int64_t>(qv); ++n) {
                std::size_t idx = 0;
                for (int i = 0; i < K; ++i)
                    if (e[static_cast<std::size_t>(mod_floor(sign * (n + off[static_cast<std::size_t>(i)]), static_cast<std::int64_t>(qv)))])
                        idx |= std::size_t{1} << i;
                ++brute[idx];
            }
            EXPECT_EQ(all, brute);
            PatternQuery pq{off, std::vector<int>(static_cast<std::size_t>(K), 1), sign};
            EXPECT_EQ(pattern_count(q, pq), brute.back());
        }
    }
}

TEST(ResidueStats, PrimePatternBoundDecision)
{
    // |nu - p/2^K| <= K (3 + sqrt p) evaluated in floating point away from the edge
    for (std::int64_t p : {7, 101, 4999})
        for (int K = 1; K <= 4; ++K)
            for (std::int64_t nu = 0; nu <= p; nu += std::max<std::int64_t>(1, p / 50)) {
                const double lhs = std::fabs(static_cast<double>(nu) - static_cast<double>(p) / std::ldexp(1.0, K));
                const double rhs = K * (3 + std::sqrt(static_cast<double>(p)));
                if (std::fabs(lhs - rhs) > 1e-6) {
                    EXPECT_EQ(prime_pattern_bound_holds(p, K, nu), lhs <= rhs);
                }
            }
}

TEST(ResidueStats, WindowResidueCountAndScan)
{
    const auto q = SquareFreeModulus::from_value(105);
    const auto e = eps_table(105);
    for (std::int64_t n = 0; n < 105; ++n) {
        std::int64_t c = 0;
        for (std::int64_t i = 1; i <= 8; ++i) c += e[static_cast<std::size_t>((n + i) % 105)];
        ASSERT_EQ(window_residue_count(q, n, 8), c);
    }
    const auto scan = window_scan(q, 8, Rat(1, 4));
    std::vector<bool> covered(105, false);
    std::int64_t prev = -8;
    for (std::int64_t s : scan.starts) {
        EXPECT_GE(s, prev + 8);
        const Rat D = make_rat(window_residue_count(q, s, 8), 8) - Rat(1, 8);
        EXPECT_LT(abs(D), Rat(1, 4));
        for (std::int64_t i = s; i < std::min<std::int64_t>(s + 8, 105); ++i) covered[static_cast<std::size_t>(i)] = true;
        prev = s;
    }
    EXPECT_EQ(scan.uncovered, std::count(covered.begin(), covered.end(), false));
}

TEST(ResidueStats, TranslateDeficiencyAndLeakMatchBruteForce)
{
    for (std::uint64_t qv : {105u, 1155u}) {
        const auto q = SquareFreeModulus::from_value(qv);
        const std::int64_t n = static_cast<std::int64_t>(qv);
        for (int c : {1, 2}) {
            const auto g = GammaParam::from_c(c);
            const std::int64_t w = g.window(q.kappa());
            const auto e = eps_table(n);
            const auto L = window_table(n, w);
            const auto lt = lambda_table(q, g);
            for (std::int64_t x = 0; x < n; ++x) ASSERT_EQ(lt[static_cast<std::size_t>(x)], L[static_cast<std::size_t>(x)]);

            std::int64_t sq = 0;
            for (int v : e) sq += v;
            const auto counts = translate_counts(q, g);
            const Rat rho_t(1, 5);
            std::int64_t bad = 0;
            for (std::int64_t t = 0; t < n; ++t) {
                std::int64_t cnt = 0;
                for (std::int64_t s = 0; s < n; ++s)
                    if (e[static_cast<std::size_t>(s)] && !L[static_cast<std::size_t>((t + s) % n)]) ++cnt;
                ASSERT_EQ(counts[static_cast<std::size_t>(t)], cnt);
                if (Rat(cnt) < (1 - rho_t) * (1 - g.gamma) * sq) ++bad;
            }
            const auto d = translate_deficiency(q, g, rho_t, true);
            EXPECT_EQ(d.bad_count, bad);
            EXPECT_EQ(static_cast<std::int64_t>(d.bad.size()), bad);
            EXPECT_EQ(d.fraction, make_rat(bad, n));

            const auto leaks = leak_counts(q, g);
            for (std::int64_t x = 0; x < n; x += 7) {
                std::int64_t cnt = 0;
                for (std::int64_t k = 0; k < n; ++k)
                    if (!L[static_cast<std::size_t>((x + k * k) % n)]) ++cnt;
                ASSERT_EQ(leaks[static_cast<std::size_t>(x)], cnt);
                EXPECT_EQ(leak_fraction(x, q, g), make_rat(cnt, n));
            }
        }
    }
}

TEST(ResidueStats, GapStatsMatchSortedSquares)
{
    const auto q = SquareFreeModulus::from_value(1155);
    const auto gs = gap_stats(q);
    std::vector<std::int64_t> r;
    for (std::int64_t k = 0; k < 1155; ++k) {
        const std::int64_t s = k * k % 1155;
        if (std::gcd(s, std::int64_t{1155}) == 1) r.push_back(s);
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    std::vector<std::int64_t> gaps;
    for (std::size_t i = 0; i < r.size(); ++i) gaps.push_back(i + 1 < r.size() ? r[i + 1] - r[i] : r[0] + 1155 - r[i]);
    std::sort(gaps.begin(), gaps.end());
    EXPECT_EQ(gs.gaps, gaps);
    EXPECT_EQ(gs.sigma, static_cast<std::int64_t>(r.size()));
    EXPECT_EQ(gs.mean_gap, make_rat(1155, static_cast<std::int64_t>(r.size())));
    const double ks = ks_exponential(gs);
    EXPECT_GT(ks, 0.0);
    EXPECT_LT(ks, 1.0);
}

TEST(ResidueStats, LeakageConstants)
{
    EXPECT_EQ(c_tilde_gamma(GammaParam::from_c(2)), Rat(11, 19));
    EXPECT_THROW(leakage_constants(SquareFreeModulus::from_value(105), GammaParam::from_c(2)), ContractError);
    EXPECT_EQ(c_gamma(GammaParam::from_c(3)), Rat(8));
    const auto g = GammaParam::from_c(3);
    const auto lc = leakage_constants(SquareFreeModulus::from_value(1155), g);
    EXPECT_EQ(lc.C, Rat(8));
    EXPECT_EQ(lc.C_tilde, c_tilde_gamma(g));
    EXPECT_EQ(lc.measure_lambda_bar_prime, build_lambda_bar(SquareFreeModulus::from_value(1155), g, true).measure());
}
