#include "sqavg/residue_stats.hpp"

#include "sqavg/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace sqavg {

std::vector<std::int64_t> pattern_counts_all(const SquareFreeModulus& q,
                                             const std::vector<std::int64_t>& offsets, int sign)
{
    const std::int64_t n = q.q64();
    const auto K = offsets.size();
    if (K > 20) throw ContractError("pattern_counts_all: at most 20 offsets");
    auto t = square_table(q, false);
    if (sign < 0) std::reverse(t.begin() + 1, t.end());   // t[v] = eps(-v)
    std::vector<std::int64_t> off(K);
    for (std::size_t i = 0; i < K; ++i) off[i] = mod_floor(offsets[i], n);
    const std::size_t cells = std::size_t{1} << K;
    std::vector<std::vector<std::int64_t>> part(chunk_count(n));
    parallel_chunks(n, [&](std::int64_t b, std::int64_t e, std::size_t c) {
        std::vector<std::int64_t> local(cells, 0);
        for (std::int64_t m = b; m < e; ++m) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < K; ++i) {
                std::int64_t v = m + off[i];
                if (v >= n) v -= n;
                if (t[static_cast<std::size_t>(v)]) idx |= std::size_t{1} << i;
            }
            ++local[idx];
        }
        part[c] = std::move(local);
    });
    std::vector<std::int64_t> out(cells, 0);
    for (const auto& p : part)
        for (std::size_t i = 0; i < cells; ++i) out[i] += p[i];
    return out;
}

std::int64_t pattern_count(const SquareFreeModulus& q, const PatternQuery& query)
{
    if (query.offsets.size() != query.pattern.size())
        throw ContractError("pattern_count: offsets and pattern differ in length");
    if (query.sign != 1 && query.sign != -1) throw ContractError("pattern_count: sign must be +1 or -1");
    auto sorted = query.offsets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ContractError("pattern_count: offsets must be distinct");
    auto all = pattern_counts_all(q, query.offsets, query.sign);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < query.pattern.size(); ++i)
        if (query.pattern[i]) idx |= std::size_t{1} << i;
    return all[idx];
}

bool prime_pattern_bound_holds(std::int64_t p, int K, std::int64_t nu)
{
    // |nu 2^K - p| <= 2^K K (3 + sqrt p)
    const BigInt scale = BigInt(1) << K;
    BigInt lhs = abs(BigInt(nu) * scale - p);
    BigInt s = scale * K;
    BigInt d = lhs - 3 * s;
    if (d <= 0) return true;
    return d * d <= s * s * p;
}

Rat bernoulli_deviation(const SquareFreeModulus& q, const std::vector<std::int64_t>& offsets)
{
    if (offsets.empty()) return Rat(0);
    auto counts = pattern_counts_all(q, offsets, 1);
    const Rat a = pow2(-q.kappa());
    const Rat b = 1 - a;
    const Rat qq(q.q(), 1);
    Rat worst(0);
    for (std::size_t idx = 0; idx < counts.size(); ++idx) {
        int ones = __builtin_popcountll(idx);
        Rat prob(1);
        for (std::size_t i = 0; i < offsets.size(); ++i) prob *= (static_cast<int>(i) < ones) ? a : b;
        Rat dev = abs(Rat(counts[idx]) / qq - prob);
        if (dev > worst) worst = dev;
    }
    return worst;
}

std::int64_t StatConfig::derive_K2(std::int64_t K1, const Rat& rho1, int kappa, const Rat& gamma)
{
    Rat v = (1 + rho1 * Rat(BigInt(1) << kappa)) * gamma * Rat(K1);
    return to_int64(ceil_of(v));
}

std::int64_t window_residue_count(const SquareFreeModulus& q, std::int64_t n, std::int64_t K1)
{
    std::int64_t c = 0;
    for (std::int64_t i = 1; i <= K1; ++i) c += epsilon(n + i, q);
    return c;
}

WindowScan window_scan(const SquareFreeModulus& q, std::int64_t K1, const Rat& rho)
{
    if (K1 < 1) throw ContractError("window_scan: K1 must be positive");
    const std::int64_t n = q.q64();
    auto t = square_table(q, false);
    auto eps = [&](std::int64_t v) { return static_cast<std::int64_t>(t[static_cast<std::size_t>(mod_floor(v, n))]); };
    // D < rho  <=>  |c - K1 2^-kappa| < rho K1  <=>  |c 2^kappa - K1| < rho K1 2^kappa
    const BigInt two_k = BigInt(1) << q.kappa();
    const Rat limit = rho * Rat(K1) * Rat(two_k);
    auto ok = [&](std::int64_t c) {
        BigInt d = abs(BigInt(c) * two_k - K1);
        return Rat(d) < limit;
    };
    WindowScan out;
    std::int64_t c = 0;
    for (std::int64_t i = 1; i <= K1; ++i) c += eps(i);
    std::int64_t uncovered = 0;
    std::int64_t m = 0;
    while (m < n) {
        if (ok(c)) {
            out.starts.push_back(m);
            const std::int64_t next = m + K1;
            if (next >= n) break;
            // slide c from m to next
            for (std::int64_t s = m; s < next; ++s) c += eps(s + K1 + 1) - eps(s + 1);
            m = next;
        } else {
            ++uncovered;
            c += eps(m + K1 + 1) - eps(m + 1);
            ++m;
        }
    }
    out.uncovered = uncovered;
    return out;
}

std::vector<std::uint8_t> lambda_table(const SquareFreeModulus& q, const GammaParam& g)
{
    const std::int64_t n = q.q64();
    const std::int64_t w = g.window(q.kappa());
    std::vector<std::uint8_t> lam(static_cast<std::size_t>(n), 0);
    if (w >= n) {
        std::fill(lam.begin(), lam.end(), 1);
        return lam;
    }
    auto t = square_table(q, false);
    for (std::int64_t s = 0; s < n; ++s) {
        if (!t[static_cast<std::size_t>(s)]) continue;
        std::int64_t base = mod_floor(-s, n);
        for (std::int64_t j = 0; j < w; ++j) {
            std::int64_t v = base + j;
            if (v >= n) v -= n;
            lam[static_cast<std::size_t>(v)] = 1;
        }
    }
    return lam;
}

std::vector<std::int64_t> translate_counts(const SquareFreeModulus& q, const GammaParam& g)
{
    const std::int64_t n = q.q64();
    const std::int64_t w = g.window(q.kappa());
    std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
    if (w >= n) return out;
    const auto& ps = q.primes();
    const int kappa = q.kappa();
    BigInt sig = sigma(q);
    const double direct_cost = static_cast<double>(n) * sig.get_d();
    const double crt_cost = static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(w, 60))) * kappa;
    if (w <= 20 && crt_cost <= direct_cost) {
        // count(n) = sum_T (-1)^|T| prod_p g_{p,T}(n mod p),
        // g_{p,T}(a) = #{s mod p : eps_p(s) and eps_p(j - a - s) for j in T}
        const std::size_t subsets = std::size_t{1} << w;
        std::vector<std::vector<std::vector<std::int64_t>>> gt(subsets);
        for (std::size_t T = 0; T < subsets; ++T) {
            gt[T].resize(ps.size());
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const auto p = static_cast<std::int64_t>(ps[i]);
                std::vector<std::uint8_t> sq(static_cast<std::size_t>(p), 0);
                for (std::int64_t k = 0; k < p; ++k) sq[static_cast<std::size_t>(k * k % p)] = 1;
                std::vector<std::int64_t> row(static_cast<std::size_t>(p), 0);
                for (std::int64_t a = 0; a < p; ++a) {
                    std::int64_t cnt = 0;
                    for (std::int64_t s = 0; s < p; ++s) {
                        if (!sq[static_cast<std::size_t>(s)]) continue;
                        bool all = true;
                        for (std::int64_t j = 0; j < w && all; ++j)
                            if ((T >> j) & 1) all = sq[static_cast<std::size_t>(mod_floor(j - a - s, p))];
                        cnt += all;
                    }
                    row[static_cast<std::size_t>(a)] = cnt;
                }
                gt[T][i] = std::move(row);
            }
        }
        parallel_chunks(n, [&](std::int64_t b, std::int64_t e, std::size_t) {
            std::vector<std::int64_t> r(ps.size());
            for (std::size_t i = 0; i < ps.size(); ++i) r[i] = b % static_cast<std::int64_t>(ps[i]);
            for (std::int64_t m = b; m < e; ++m) {
                std::int64_t total = 0;
                for (std::size_t T = 0; T < subsets; ++T) {
                    std::int64_t prod = 1;
                    for (std::size_t i = 0; i < ps.size() && prod; ++i) prod *= gt[T][i][static_cast<std::size_t>(r[i])];
                    total += (__builtin_popcountll(T) & 1) ? -prod : prod;
                }
                out[static_cast<std::size_t>(m)] = total;
                for (std::size_t i = 0; i < ps.size(); ++i)
                    if (++r[i] == static_cast<std::int64_t>(ps[i])) r[i] = 0;
            }
        }, 1 << 12);
        return out;
    }
    auto lam = lambda_table(q, g);
    auto res = lambda0(q).residues;
    parallel_chunks(n, [&](std::int64_t b, std::int64_t e, std::size_t) {
        for (std::int64_t m = b; m < e; ++m) {
            std::int64_t cnt = 0;
            for (auto s : res) {
                std::int64_t v = m + s;
                if (v >= n) v -= n;
                cnt += !lam[static_cast<std::size_t>(v)];
            }
            out[static_cast<std::size_t>(m)] = cnt;
        }
    }, 1 << 8);
    return out;
}

Deficiency translate_deficiency(const SquareFreeModulus& q, const GammaParam& g, const Rat& rho_t,
                                bool keep_bad)
{
    auto counts = translate_counts(q, g);
    const Rat threshold = (1 - rho_t) * (1 - g.gamma) * Rat(sigma(q));
    Deficiency d;
    for (std::size_t m = 0; m < counts.size(); ++m) {
        if (Rat(counts[m]) < threshold) {
            ++d.bad_count;
            if (keep_bad) d.bad.push_back(static_cast<std::int64_t>(m));
        }
    }
    d.fraction = Rat(d.bad_count) / Rat(q.q());
    return d;
}

std::vector<std::int64_t> leak_counts(const SquareFreeModulus& q, const GammaParam& g)
{
    const std::int64_t n = q.q64();
    auto lam = lambda_table(q, g);
    // multiplicity of each square value k^2 mod q over k in [0,q)
    std::vector<std::int64_t> mult(static_cast<std::size_t>(n), 0);
    for (std::int64_t k = 0; k < n; ++k) ++mult[static_cast<std::size_t>(static_cast<std::int64_t>(
        mulmod(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n))))];
    std::vector<std::pair<std::int64_t, std::int64_t>> sq;
    for (std::int64_t v = 0; v < n; ++v)
        if (mult[static_cast<std::size_t>(v)]) sq.emplace_back(v, mult[static_cast<std::size_t>(v)]);
    std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
    parallel_chunks(n, [&](std::int64_t b, std::int64_t e, std::size_t) {
        for (std::int64_t x = b; x < e; ++x) {
            std::int64_t cnt = 0;
            for (const auto& [v, c] : sq) {
                std::int64_t y = x + v;
                if (y >= n) y -= n;
                if (!lam[static_cast<std::size_t>(y)]) cnt += c;
            }
            out[static_cast<std::size_t>(x)] = cnt;
        }
    }, 1 << 8);
    return out;
}

Rat leak_fraction(std::int64_t x, const SquareFreeModulus& q, const GammaParam& g)
{
    const std::int64_t n = q.q64();
    auto lam = lambda_table(q, g);
    std::int64_t cnt = 0;
    const std::int64_t xr = mod_floor(x, n);
    for (std::int64_t k = 0; k < n; ++k) {
        auto k2 = static_cast<std::int64_t>(
            mulmod(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n)));
        std::int64_t y = xr + k2;
        if (y >= n) y -= n;
        cnt += !lam[static_cast<std::size_t>(y)];
    }
    return Rat(cnt) / Rat(n);
}

GapStats gap_stats(const SquareFreeModulus& q)
{
    BigInt sp = sigma_prime(q);
    if (sp > limits().gap_cap) throw ScaleError("gap enumeration exceeds the gap cap");
    auto res = lambda0_prime(q).residues;
    GapStats gs;
    gs.modulus = q;
    gs.sigma = static_cast<std::int64_t>(res.size());
    if (res.empty()) throw ContractError("gap_stats: no coprime squares");
    const std::int64_t n = q.q64();
    gs.gaps.reserve(res.size());
    for (std::size_t i = 0; i + 1 < res.size(); ++i) gs.gaps.push_back(res[i + 1] - res[i]);
    gs.gaps.push_back(res.front() + n - res.back());
    std::sort(gs.gaps.begin(), gs.gaps.end());
    gs.mean_gap = Rat(n) / Rat(gs.sigma);
    return gs;
}

double ks_exponential(const GapStats& gs)
{
    const double mean = to_double(gs.mean_gap);
    const auto total = static_cast<double>(gs.gaps.size());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < gs.gaps.size()) {
        std::size_t j = i;
        while (j < gs.gaps.size() && gs.gaps[j] == gs.gaps[i]) ++j;
        const double y = static_cast<double>(gs.gaps[i]) / mean;
        const double cdf = -std::expm1(-y);
        const double below = static_cast<double>(i) / total;
        const double upto = static_cast<double>(j) / total;
        worst = std::max({worst, std::fabs(upto - cdf), std::fabs(below - cdf)});
        i = j;
    }
    return worst;
}

Rat c_gamma(const GammaParam& g)
{
    Rat d = 1 - 7 * g.gamma;
    if (d <= 0) throw ContractError("C_gamma needs gamma < 1/7");
    return 1 / d;
}

Rat c_tilde_gamma(const GammaParam& g)
{
    const Rat& y = g.gamma;
    return (1 - y - y * y) / (1 - y + 7 * y * y);
}

LeakageConstants leakage_constants(const SquareFreeModulus& q, const GammaParam& g)
{
    if (g.gamma >= Rat(1, 7)) throw ContractError("leakage_constants needs gamma < 1/7");
    LeakageConstants r;
    r.C = c_gamma(g);
    r.C_tilde = c_tilde_gamma(g);
    r.measure_lambda_bar_prime = build_lambda_bar(q, g, true).measure();
    const Rat& y = g.gamma;
    r.holds_lower = r.measure_lambda_bar_prime > 0 && r.C > y / r.measure_lambda_bar_prime;
    r.holds_upper = r.C_tilde * (1 - r.measure_lambda_bar_prime) < 1 - y - y * y;
    return r;
}

}  // namespace sqavg
