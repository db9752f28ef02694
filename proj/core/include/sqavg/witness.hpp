#pragma once

#include "sqavg/family.hpp"
#include "sqavg/m099.hpp"
#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"
#include "sqavg/step_function.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sqavg {

struct SupAverage {
    Rat value;
    std::int64_t argmax = 0;   // smallest N attaining the sup
};

// max over 1 <= N <= N_max of (1/N) sum_{k=1}^N f(x + k^2), x a cell of f's
// grid. The rotation by 1/tau0 on [0,1) is the unit shift on f's period,
// which divides tau0.
SupAverage sup_average(const StepFunction& f, std::int64_t x_cell, std::int64_t N_max);

// sup over all N. k^2 mod P has period P in k, and every longer average is
// a mediant of a full-period average and a shorter one, so N_max = P is exact.
SupAverage sup_average_all(const StepFunction& f, std::int64_t x_cell);

// lambda{sup_N avg > t} t / int|f|. f must be nonnegative; 0 when int f = 0.
Rat weak11_ratio(const StepFunction& f, const Rat& t);
Rat sup_level_measure(const StepFunction& f, const Rat& t);

// The family rescaled to [0,1): f = 1.01 sum f_h, X-bar_h = X_h, E-bar = E.
// Everything stays at the structural period, which divides tau0.
struct Witness {
    BigInt tau0;
    Rat Omega;
    StepFunction f;
    std::vector<StepFunction> X_bars;
    PeriodicIntSet E_bar;
    Rat integral_f;
    Rat integral_bound;   // K 2^(-M+2)
    int K = 0;
    int M = 1;
};

inline const Rat kWitnessBoost{101, 100};

// ContractError unless int f < K 2^(-M+2).
Witness build_witness(const KMFamily& fam, const FamilyParams& params);

// N_x = alpha + (Omega - 1) alpha tau(x) - 1.
BigInt witness_N(const BigInt& alpha, const BigInt& tau_x, const Rat& Omega);

struct WitnessSweep {
    std::int64_t units = 0;     // grid points j/tau0 off E-bar, j over one structural period
    std::int64_t failed = 0;
    std::int64_t zero_ties = 0;   // sum X-bar = 0 and the average is 0
    std::string witness;
    Rat min_margin;
    Rat max_N_factor;   // max N_x / ((Omega - 1) alpha tau(x))
};

// For every cell off E-bar: sup_average(f, x, N_x) > sum_h X-bar_h(x).
WitnessSweep witness_sweep(const Witness& w, const KMFamily& fam);

struct DivergenceConfig {
    Rat Gamma{11, 10};
    Rat Omega{1000};
    std::int64_t A = 1;
    std::uint64_t seed = 1;
    int max_K = 25;   // affine design capacity
    bool verify_design = true;
};

struct WitnessReport {
    int p = 0;
    int M_p = 0;
    int K = 0;
    bool feasible = false;
    std::string infeasible_reason;

    Rat u;              // mean of the M-0.99 variable
    Rat u_closed;       // 0.99^2 M 2^(-M-1)
    Rat u_floor;        // 0.9 M 2^(-M-1)
    Rat variance;
    Rat chebyshev;      // 4 Var / (K u^2)
    Rat delta;          // 1/p

    BigInt tau0;
    Rat threshold;      // f_h == threshold
    Rat measure_E;
    Rat weak_law_measure;   // lambda{(1/K) sum X >= u/2}
    Rat measure_U_prime;    // lambda{(1/K) sum X > 0.45 M 2^(-M-1)}
    bool design_m099 = false;
    bool design_pairwise = false;
    std::int64_t domination_failures = 0;
    BigInt N_x;
    Rat N_factor;

    StepFunction f;
    Rat integral_f;
    Rat integral_bound;
    Rat t_p;
    Rat sup_value;
    Rat measure_U;
    Rat ratio;              // integral_f / t_p
    Rat bound_32_over_Mp;
    Rat weak11;             // measure_U t_p / integral_f
};

// Threshold family f_h == c on R with X_h the affine-design copies and
// E = {some X_h >= c}, c halfway between the largest ladder value below
// Gamma 2^(-M+1) and that bound.
std::vector<WitnessReport> divergence_experiment(const std::vector<int>& p_list, const DivergenceConfig& cfg);

}  // namespace sqavg
