#pragma once

#include "sqavg/modulus.hpp"
#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"

#include <cstdint>
#include <vector>

namespace sqavg {

struct PatternQuery {
    std::vector<std::int64_t> offsets;   // a_1..a_K, distinct
    std::vector<int> pattern;            // eps_1..eps_K in {0,1}
    int sign = 1;                        // +1: eps(n+a), -1: eps(-(n+a))
};

// #{n in [0,q) : eps(sign*(n+a_i), q) = eps_i for all i}
std::int64_t pattern_count(const SquareFreeModulus& q, const PatternQuery& query);

// Counts for all 2^K patterns in one pass; index bit i is eps_i.
std::vector<std::int64_t> pattern_counts_all(const SquareFreeModulus& q,
                                             const std::vector<std::int64_t>& offsets, int sign = 1);

// For prime p: |nu - p/2^K| <= K (3 + sqrt p), decided in integers.
bool prime_pattern_bound_holds(std::int64_t p, int K, std::int64_t nu);

// max over patterns of |nu/q - (2^-kappa)^{sum eps} (1-2^-kappa)^{K - sum eps}|
Rat bernoulli_deviation(const SquareFreeModulus& q, const std::vector<std::int64_t>& offsets);

struct StatConfig {
    Rat rho{1, 4};
    Rat rho0{1, 10};
    Rat rho1{1, 4};
    Rat rho_tilde{1, 5};
    Rat eps1{1, 10};
    std::int64_t K1 = 8;
    std::int64_t K2 = 0;

    // K2 = ceil((1 + rho1 2^kappa) gamma K1)
    static std::int64_t derive_K2(std::int64_t K1, const Rat& rho1, int kappa, const Rat& gamma);
};

struct WindowScan {
    std::vector<std::int64_t> starts;   // n_j with n_j < q
    std::int64_t uncovered = 0;         // n in [0,q) outside every [n_j, n_j + K1)
};

// Greedy scan: n_1 minimal with D(K1,n,q) < rho, then n_{j+1} >= n_j + K1
// minimal with the same property, where
// D(K1,n,q) = |K1^-1 sum_{i=1..K1} eps(n+i,q) - 2^-kappa|.
WindowScan window_scan(const SquareFreeModulus& q, std::int64_t K1, const Rat& rho);

// |Lambda0(q) cap [n+1, n+K1]| for the window starting at n.
std::int64_t window_residue_count(const SquareFreeModulus& q, std::int64_t n, std::int64_t K1);

// Integer window set Lambda(q) = -Lambda0(q) + {0..w-1} as a membership table on [0,q).
std::vector<std::uint8_t> lambda_table(const SquareFreeModulus& q, const GammaParam& g);

struct Deficiency {
    std::int64_t bad_count = 0;
    Rat fraction;
    std::vector<std::int64_t> bad;   // the bad n, ascending (only when requested)
};

// bad n: |((n + Lambda0) \ Lambda) cap [0,q)| < (1 - rho_t)(1 - gamma) |Lambda0 cap [0,q)|
Deficiency translate_deficiency(const SquareFreeModulus& q, const GammaParam& g, const Rat& rho_t,
                                bool keep_bad = false);

// Per-n counts |((n + Lambda0) \ Lambda) cap [0,q)|, n in [0,q).
std::vector<std::int64_t> translate_counts(const SquareFreeModulus& q, const GammaParam& g);

// (1/q) #{k in [0,q) : x + k^2 not in Lambda(q)}
Rat leak_fraction(std::int64_t x, const SquareFreeModulus& q, const GammaParam& g);
// Same for every x in [0,q) at once.
std::vector<std::int64_t> leak_counts(const SquareFreeModulus& q, const GammaParam& g);

struct GapStats {
    SquareFreeModulus modulus;
    std::vector<std::int64_t> gaps;   // sorted
    std::int64_t sigma = 0;
    Rat mean_gap;
};

GapStats gap_stats(const SquareFreeModulus& q);
// Kolmogorov-Smirnov distance between the normalized gaps g/mean and 1 - e^-x.
double ks_exponential(const GapStats& gs);

Rat c_gamma(const GammaParam& g);         // 1 / (1 - 7 gamma)
Rat c_tilde_gamma(const GammaParam& g);   // (1 - gamma - gamma^2) / (1 - gamma + 7 gamma^2)

struct LeakageConstants {
    Rat C;
    Rat C_tilde;
    Rat measure_lambda_bar_prime;
    bool holds_lower = false;   // C > gamma / measure
    bool holds_upper = false;   // C~ (1 - measure) < 1 - gamma - gamma^2
};

LeakageConstants leakage_constants(const SquareFreeModulus& q, const GammaParam& g);

}  // namespace sqavg
