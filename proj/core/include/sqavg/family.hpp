#pragma once

#include "sqavg/m099.hpp"
#include "sqavg/modulus.hpp"
#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"
#include "sqavg/step_function.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sqavg {

// Finite explicit prime pools. `main` is the input pool; `leak[L]` are the
// pools the leakage draws tau'_L and q_L from. A number is admissible when it
// is coprime to every pool prime.
struct PrimePools {
    std::vector<std::uint64_t> main;
    std::vector<std::vector<std::uint64_t>> leak;

    std::vector<std::uint64_t> all() const;
    bool disjoint() const;
    bool admissible(std::uint64_t n) const;
    bool admissible(const BigInt& n) const;
};

struct FamilyParams {
    Rat delta{1, 10};
    Rat Omega{2};
    Rat Gamma{11, 10};
    std::int64_t A = 1;
    PrimePools pools;

    void validate() const;   // ConfigError
};

// Smallest odd prime >= from that is admissible and coprime to `extra`.
std::uint64_t next_admissible_prime(std::uint64_t from, const PrimePools& pools,
                                    const std::vector<std::uint64_t>& extra = {});
// Same for big bounds: smallest admissible prime > above.
BigInt next_admissible_prime_above(const BigInt& above, const PrimePools& pools,
                                   const std::vector<std::uint64_t>& extra = {});

// A K-M family. Components are stored at their own (small) structural
// periods; `tau` is the declared period, a common multiple of all of them.
// alpha/omega/tau_x are integer valued; 0 marks an undefined point (in E).
struct KMFamily {
    int M = 1;
    BigInt tau{1};
    PeriodicIntSet lam = PeriodicIntSet::full_set();
    std::int64_t lam_period = 1;   // q~; 1 when living on R
    Rat gamma_prime{1};
    std::vector<StepFunction> f;
    std::vector<StepFunction> X;
    PeriodicIntSet E_delta;
    StepFunction alpha;
    StepFunction omega;
    StepFunction tau_x;

    int K() const { return static_cast<int>(f.size()); }
    std::int64_t structural_period() const;
};

struct ClauseResult {
    std::string clause;
    bool pass = true;
    std::int64_t checked = 0;
    std::string witness;   // first failure, empty on pass
    std::string note;
};

struct FamilyReport {
    std::vector<ClauseResult> clauses;
    std::int64_t zero_ties = 0;   // cells where X_h = 0 and the average is 0
    bool pass() const;
    bool pass_except(const std::string& clause) const;
    const ClauseResult* find(const std::string& clause) const;
};

struct VerifyOptions {
    bool exhaustive = true;
    std::uint64_t seed = 1;
    std::int64_t samples = 64;                      // (n, m) pairs per cell when sampling
    std::int64_t pair_budget = std::int64_t{1} << 26;   // exhaustive (n, m) pairs per cell
};

// Clauses: "periods", "windows" (window data and E measure), "domination",
// "coprimality", "window-periodicity", "integral" (mean bound), "distribution"
// (M-0.99 law and pairwise independence on Lambda).
FamilyReport verify_family(const KMFamily& fam, const FamilyParams& params,
                           const VerifyOptions& opt = {});

// Window recipe at L = 0: alpha = A + 1, tau(x) the smallest admissible odd
// prime, omega = ceil(tau(x) Omega (A + 2)), tau the smallest admissible
// prime > omega^2.
struct WindowRecipe {
    std::int64_t alpha = 0;
    std::int64_t tau_x = 0;
    BigInt omega;
    BigInt tau;
};
WindowRecipe window_recipe(const FamilyParams& params, const std::vector<std::uint64_t>& extra = {});

// f == 1, X == value (one constant per copy), E empty.
KMFamily make_constant_family(const FamilyParams& params, int M, int K, const Rat& value);
// f == 1, X = K independent M-0.99 copies on a product grid, E empty.
KMFamily make_base_family(const FamilyParams& params, int M, int K, std::uint64_t seed,
                          const std::vector<std::uint64_t>& extra = {});

// Puts a family living on R onto Lambda-bar'(q~): f-bar = f q~/2^kappa on
// Xi-bar, X-bar = X on Lambda-bar', tau-bar = q~ tau, tau-bar(x) = q~ tau(x).
// ContractError on coprimality violations or if the conditional masses of
// X-bar on Lambda-bar' are not exact.
KMFamily lift_to_residue_class(const KMFamily& fam, const SquareFreeModulus& qt, const GammaParam& g,
                               const PrimePools& pools);

// Base family built with pools + primes of q~ and Omega q~, then lifted.
KMFamily lifted_family(const FamilyParams& params, int M, int K, const SquareFreeModulus& qt,
                       const GammaParam& g, std::uint64_t seed);

// For x in Lambda-bar' off E and m = tau(x) q~:
// avg(f-bar, x, n, m) >= avg(f, x, n, tau(x)) for every alpha <= n <= omega - m.
struct TransportReport {
    std::int64_t checked = 0;
    std::int64_t failed = 0;
    Rat min_margin;
    bool pass() const { return failed == 0; }
};
TransportReport lift_transport_check(const KMFamily& base, const KMFamily& lifted,
                                     const SquareFreeModulus& qt);

}  // namespace sqavg
