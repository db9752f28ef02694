#pragma once

#include "sqavg/family.hpp"
#include "sqavg/lazy.hpp"
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

struct LeakageConfig {
    Rat rho{1, 10};                  // tolerance in the reported ratio bounds
    Rat rho_prime{1, 100};           // X_{K+1,0} = (1 - rho') C~
    Rat rho_tilde{1, 5};             // translate-deficiency threshold for E'''
    Rat approx_tolerance{1, 10};     // "approximately equal" in the Phi/Psi ratios
    std::int64_t tau_floor_factor = 4;   // tau' >= factor * tau_{L-1}
    int tau_bar_exponent = 3;            // K = 0: tau-bar_L = q_L tau'^e
    std::uint64_t seed = 1;
    std::int64_t identity_samples = 256;  // pointwise samples of the support identity
};

struct ScheduleStep {
    BigInt tau_prime_floor{0};
    std::vector<std::uint64_t> q_primes;
};

struct IdentityCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

// A large-scale inequality evaluated at desk scale: reported, never asserted
// unless the scenario declares it achievable.
struct BoundCheck {
    std::string name;
    bool holds = false;
    Rat margin;   // positive iff the inequality holds with room
    std::string detail;
};

// Bookkeeping of one step L-1 -> L.
struct LeakageLevel {
    int L = 0;
    BigInt tau_prev;     // tau_{L-1}
    BigInt tau_prime;    // tau'_{L-1}
    BigInt k;            // floor(tau' / tau_{L-1})
    SquareFreeModulus q;
    BigInt tau;          // tau_L
    BigInt tau_bar;

    PeriodicIntSet lam_bar_prime;   // period q
    PeriodicIntSet xi;
    PeriodicIntSet phi_tilde, phi_hat, psi_hat, psi_tilde;
    LazySet phi, psi;
    LazySet F_prime_prev;   // F'_{L-1}
    std::vector<LazySet> S_prime_prev;
    LazySet E_prime_prev;   // E'^{L-1}
    LazySet E1, E2, E2_tilde, E3, E_delta;

    Rat m_lam_bar_prime, m_phi, m_psi, m_F_prime_prev, m_F, r;
    std::vector<Rat> m_S;
    MeasureBound m_E;
    Tri lam_in_psi = Tri::Unknown;
    bool phi_empty = false;

    std::vector<IdentityCheck> identities;
    std::vector<BoundCheck> bounds;

    std::optional<KMFamily> inner;   // K > 0: family lifted onto Lambda-bar'(q_L)

    bool identities_pass() const;
};

struct LeakageState {
    int L = 0;
    int M = 1;
    int K = 0;
    GammaParam g;
    FamilyParams params;
    LeakageConfig cfg;
    Rat C_tilde;
    Rat Gamma0;   // K > 0: Gamma_0 with C Gamma_0 < Gamma

    BigInt tau;
    LazySet F;
    std::vector<Rat> F_measures;   // lambda(F_0..F_L)
    std::vector<Rat> r;            // r_0..r_L
    std::vector<LazySet> S;        // S_{L,0..L}
    LazySet E;
    WindowRecipe base;
    std::vector<LeakageLevel> levels;   // levels[i] is step i+1
    PrimePools pools;

    // K > 0 payload, materialized
    KMFamily family0;
    std::vector<StepFunction> f;
    std::vector<StepFunction> X;

    // X_{K+1,L} on S_{L,l} \ S_{L,l-1}
    Rat x_value(int l) const;
    int L_prime() const;   // smallest L' with (1 - gamma/2)^L' < 2^-M
};

struct Window {
    bool defined = false;
    BigInt alpha, omega, tau_x;
};

// C~ and Gamma_0 are derived from g; rho' must keep (1 - rho') C~ < 1.
LeakageState leakage_init(const FamilyParams& params, int M, int K, const GammaParam& g,
                          const LeakageConfig& cfg);

// tau' = smallest admissible prime >= max(floor, factor * tau_{L-1}) coprime
// to q_L; it joins the pools.
BigInt choose_tau_prime(const LeakageState& s, const BigInt& floor, const SquareFreeModulus& q);

LeakageState leakage_step(const LeakageState& s, const BigInt& tau_prime, const SquareFreeModulus& q);

struct LeakageRun {
    std::vector<LeakageState> states;   // L = 0..last
    int halted_L = -1;                  // -1 when the schedule ran out first
    std::string stop_reason;
};
LeakageRun leakage_run(const FamilyParams& params, int M, int K, const GammaParam& g, const LeakageConfig& cfg,
                       const std::vector<ScheduleStep>& schedule);

Window window_at(const LeakageState& s, const BigInt& x);

// Domination of f_{K+1,L} at sampled points when F_L materializes.
struct DominationSample {
    bool ran = false;
    std::int64_t points = 0;
    std::int64_t failed = 0;
    std::int64_t undefined = 0;
    std::string witness;
    Rat min_margin;
};
DominationSample sampled_domination(const LeakageState& s, std::int64_t samples, std::uint64_t seed);

struct FinalX {
    bool ok = false;
    std::string failure;              // clause and margin when not ok
    std::vector<int> ell;             // ell'(l), -1 when no level qualifies
    std::vector<BoundCheck> brackets;   // per l, upper bracket of the threshold chain
    std::vector<BoundCheck> masses;     // per l, ladder mass lower bound
    std::optional<StepFunction> X;
};
FinalX extract_final_X(const LeakageState& s, const std::vector<StepFunction>& peers);

}  // namespace sqavg
