#include "sqavg/lazy.hpp"
#include "sqavg/periodic_set.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace sqavg;

namespace {

using Bits = std::vector<bool>;

PeriodicIntSet random_set(std::mt19937_64& rng, std::int64_t P, Bits& bits, double density = 0.4)
{
    bits.assign(static_cast<std::size_t>(P), false);
    std::vector<std::int64_t> members;
    for (std::int64_t i = 0; i < P; ++i)
        if (std::uniform_real_distribution<>(0, 1)(rng) < density) {
            bits[static_cast<std::size_t>(i)] = true;
            members.push_back(i);
        }
    return PeriodicIntSet::from_members(P, members);
}

Bits bits_of(const PeriodicIntSet& s, std::int64_t P)
{
    Bits b(static_cast<std::size_t>(P));
    for (std::int64_t i = 0; i < P; ++i) b[static_cast<std::size_t>(i)] = s.contains_unit(i);
    return b;
}

Bits bits_of(const LazySet& s, std::int64_t P)
{
    Bits b(static_cast<std::size_t>(P));
    for (std::int64_t i = 0; i < P; ++i) b[static_cast<std::size_t>(i)] = s.contains(i);
    return b;
}

Rat density(const Bits& b)
{
    std::int64_t n = 0;
    for (bool x : b) n += x;
    return make_rat(n, static_cast<std::int64_t>(b.size()));
}

}  // namespace

TEST(PeriodicSet, BooleanOpsMatchBitsets)
{
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        const std::int64_t Pa = 1 + static_cast<std::int64_t>(rng() % 12), Pb = 1 + static_cast<std::int64_t>(rng() % 12);
        Bits a, b;
        const auto A = random_set(rng, Pa, a), B = random_set(rng, Pb, b);
        const std::int64_t P = std::lcm(Pa, Pb);
        const auto U = bits_of(set_union(A, B), P), I = bits_of(set_intersect(A, B), P), D = bits_of(set_difference(A, B), P);
        const auto C = bits_of(A.complement(), P);
        for (std::int64_t i = 0; i < P; ++i) {
            const bool x = a[static_cast<std::size_t>(i % Pa)], y = b[static_cast<std::size_t>(i % Pb)];
            ASSERT_EQ(U[static_cast<std::size_t>(i)], x || y);
            ASSERT_EQ(I[static_cast<std::size_t>(i)], x && y);
            ASSERT_EQ(D[static_cast<std::size_t>(i)], x && !y);
            ASSERT_EQ(C[static_cast<std::size_t>(i)], !x);
        }
        EXPECT_EQ(set_union(A, B).measure(), density(U));
        EXPECT_EQ(A.subset_of(set_union(A, B)), true);
    }
}

TEST(PeriodicSet, TranslateNegateDilate)
{
    std::mt19937_64 rng(12);
    for (int it = 0; it < 100; ++it) {
        const std::int64_t P = 2 + static_cast<std::int64_t>(rng() % 20);
        Bits a;
        const auto A = random_set(rng, P, a, 0.25);
        const std::int64_t t = static_cast<std::int64_t>(rng() % 50) - 25;
        const std::int64_t l = static_cast<std::int64_t>(rng() % 3), r = static_cast<std::int64_t>(rng() % 3);
        const auto T = bits_of(A.translate(t), P), N = bits_of(A.negate(), P), Dl = bits_of(A.dilate_cells(l, r), P);
        for (std::int64_t i = 0; i < P; ++i) {
            ASSERT_EQ(T[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(mod_floor(i - t, P))]);
            ASSERT_EQ(N[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(mod_floor(-i, P))]);
            bool hit = false;
            for (std::int64_t d = -r; d <= l; ++d) hit = hit || a[static_cast<std::size_t>(mod_floor(i + d, P))];
            ASSERT_EQ(Dl[static_cast<std::size_t>(i)], hit) << "P=" << P << " i=" << i << " l=" << l << " r=" << r;
        }
    }
}

TEST(PeriodicSet, LambdaBarMatchesDefinition)
{
    for (std::uint64_t qv : {15u, 105u, 143u}) {
        const auto q = SquareFreeModulus::from_value(qv);
        for (int c : {1, 2}) {
            const auto g = GammaParam::from_c(c);
            if (q.kappa() < c) continue;
            const std::int64_t w = g.window(q.kappa()), n = q.q64();
            for (bool primed : {false, true}) {
                const auto L = build_lambda_bar(q, g, primed);
                for (std::int64_t x = 0; x < n; ++x) {
                    bool in = false;
                    for (std::int64_t j = 0; j < w; ++j) {
                        const std::int64_t s = mod_floor(j - x, n);   // x = -s + j
                        const bool sq = epsilon(s, q) == 1 && (!primed || std::gcd(s, n) == 1);
                        in = in || sq;
                    }
                    ASSERT_EQ(L.contains_unit(x), in) << qv << " " << x;
                }
            }
        }
    }
    EXPECT_EQ(build_lambda_bar(SquareFreeModulus::from_value(15), GammaParam::from_c(1), false).measure(), make_rat(2, 3));
}

TEST(PeriodicSet, RearrangeTruncates)
{
    const auto F = PeriodicIntSet::unit_range(3, 0, 1);
    const auto R = rearrange(F, 11);   // F on [0, 9), empty on [9, 11)
    EXPECT_EQ(R.period(), 11);
    for (std::int64_t x = 0; x < 11; ++x) EXPECT_EQ(R.contains_unit(x), x < 9 && x % 3 == 0) << x;
}

TEST(LazySet, BlocksAndTruncationMatchBruteForce)
{
    std::mt19937_64 rng(21);
    for (int it = 0; it < 60; ++it) {
        const std::int64_t q = 3 + static_cast<std::int64_t>(rng() % 12);
        const std::int64_t w = 1 + static_cast<std::int64_t>(rng() % 7);
        Bits sb;
        const auto S = random_set(rng, q, sb, 0.3);
        const LazySet B = LazySet::blocks_meeting(big(w), q, S);
        const std::int64_t P = w * q;
        const Bits bb = bits_of(B, P);
        for (std::int64_t x = 0; x < P; ++x) {
            const std::int64_t j = x / w;
            bool meets = false;
            for (std::int64_t y = j * w; y < (j + 1) * w; ++y) meets = meets || sb[static_cast<std::size_t>(y % q)];
            ASSERT_EQ(bb[static_cast<std::size_t>(x)], meets);
        }
        const MeasureBound m = B.measure();
        ASSERT_TRUE(m.exact);
        EXPECT_EQ(m.lo, density(bb));

        Bits xb;
        const std::int64_t Px = 1 + static_cast<std::int64_t>(rng() % 6);
        const auto X = random_set(rng, Px, xb, 0.5);
        const std::int64_t Tp = Px * (2 + static_cast<std::int64_t>(rng() % 4)) + static_cast<std::int64_t>(rng() % Px);
        const std::int64_t cut = (Tp / Px) * Px;
        const LazySet T = LazySet::truncated(LazySet::leaf(X), big(cut), big(Tp));
        const LazySet Tf = LazySet::tail_filled(LazySet::leaf(X), big(cut - Px), big(Tp));
        const Bits tb = bits_of(T, Tp), tfb = bits_of(Tf, Tp);
        for (std::int64_t x = 0; x < Tp; ++x) {
            ASSERT_EQ(tb[static_cast<std::size_t>(x)], x < cut && xb[static_cast<std::size_t>(x % Px)]);
            ASSERT_EQ(tfb[static_cast<std::size_t>(x)], x >= cut - Px || xb[static_cast<std::size_t>(x % Px)]);
        }
        EXPECT_EQ(T.measure().lo, density(tb));
        EXPECT_TRUE(T.measure().exact);
        EXPECT_EQ(Tf.measure().lo, density(tfb));

        // compound expressions against brute force on the common period
        const LazySet E = (B & T) | ~LazySet::leaf(S);
        const std::int64_t PE = std::lcm(P, Tp);
        const Bits eb = bits_of(E, PE);
        for (std::int64_t x = 0; x < PE; ++x)
            ASSERT_EQ(eb[static_cast<std::size_t>(x)], (bb[static_cast<std::size_t>(x % P)] && tb[static_cast<std::size_t>(x % Tp)]) ||
                                                        !sb[static_cast<std::size_t>(x % q)]);
        const MeasureBound me = E.measure();
        EXPECT_LE(me.lo, density(eb));
        EXPECT_GE(me.hi, density(eb));
        if (me.exact) {
            EXPECT_EQ(me.lo, density(eb));
        }
        const auto mat = E.materialize();
        ASSERT_TRUE(mat.has_value());
        EXPECT_EQ(mat->measure(), density(eb));

        const Tri sub = (B & T).subset_of(B);
        EXPECT_NE(sub, Tri::No);
    }
}

TEST(LazySet, SubsetAgreesWithBruteForceWhenDecided)
{
    std::mt19937_64 rng(22);
    for (int it = 0; it < 100; ++it) {
        const std::int64_t q = 2 + static_cast<std::int64_t>(rng() % 10);
        Bits a, b;
        const auto A = random_set(rng, q, a, 0.3), Bs = random_set(rng, q, b, 0.7);
        const LazySet la = LazySet::blocks_meeting(big(2), q, A), lb = LazySet::leaf(Bs);
        const Tri t = la.subset_of(lb);
        const std::int64_t P = 2 * q;
        const Bits x = bits_of(la, P), y = bits_of(lb, P);
        bool sub = true;
        for (std::int64_t i = 0; i < P; ++i) sub = sub && (!x[static_cast<std::size_t>(i)] || y[static_cast<std::size_t>(i)]);
        if (t != Tri::Unknown) {
            ASSERT_EQ(t == Tri::Yes, sub);
        }
    }
}

TEST(LazySet, HugePeriodsStayExact)
{
    // blocks of width w over a huge prime-sized period: measure from the residue table
    const BigInt w = parse_bigint("1000000000000000000039");
    const auto S = PeriodicIntSet::from_members(7, {0, 3});
    const LazySet B = LazySet::blocks_meeting(w, 7, S);
    const MeasureBound m = B.measure();
    ASSERT_TRUE(m.exact);
    // w mod 7 != 0, so block starts jw mod 7 visit every residue; a w-window meets S always
    EXPECT_EQ(m.lo, Rat(1));
}
