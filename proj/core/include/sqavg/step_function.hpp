#pragma once

#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace sqavg {

// One run [lo, hi) of cells carrying a value.
struct Run {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    Rat value;
};

// A P-periodic piecewise-constant function on cells of width 1/R.
// Runs tile [0, P*R) in order; adjacent runs have different values.
class StepFunction {
public:
    StepFunction();   // zero, period 1

    static StepFunction constant(const Rat& c);
    static StepFunction indicator(const PeriodicIntSet& s, const Rat& value = Rat(1));
    // Disjoint pieces; overlapping supports are a ContractError.
    static StepFunction from_pieces(const std::vector<std::pair<PeriodicIntSet, Rat>>& pieces);
    // Runs in cell units on the grid (period, resolution); gaps are zero.
    static StepFunction from_runs(std::int64_t period, std::int64_t resolution, std::vector<Run> runs);

    std::int64_t period() const { return period_; }
    std::int64_t resolution() const { return res_; }
    std::int64_t cells() const { return period_ * res_; }
    const std::vector<Run>& runs() const { return runs_; }

    const Rat& at_cell(std::int64_t cell) const;
    const Rat& at_unit(std::int64_t x) const { return at_cell(x * res_); }

    // Mean over one period (the normalized integral).
    Rat mean() const;
    Rat max_value() const;
    std::vector<Rat> range() const;   // distinct values, ascending
    PeriodicIntSet level_set(const Rat& v) const;
    PeriodicIntSet support() const;
    PeriodicIntSet where(const std::function<bool(const Rat&)>& pred) const;
    // Value -> normalized mass on `on` (mass of {f = v} cap on).
    std::map<Rat, Rat> masses_on(const PeriodicIntSet& on) const;

    StepFunction rebased(std::int64_t period, std::int64_t resolution) const;
    StepFunction scaled(const Rat& c) const;
    StepFunction restricted(const PeriodicIntSet& s) const;   // f * chi_s
    StepFunction minimal() const;
    StepFunction translate_units(std::int64_t units) const;

    bool operator==(const StepFunction& o) const;

private:
    std::int64_t period_ = 1;
    std::int64_t res_ = 1;
    std::vector<Run> runs_;

    void coalesce();
};

StepFunction operator+(const StepFunction& a, const StepFunction& b);
StepFunction pointwise_min(const StepFunction& a, const StepFunction& b);
// a <= b everywhere
bool pointwise_le(const StepFunction& a, const StepFunction& b);

// Visits the joint refinement of several functions on their common grid
// (lcm of periods and resolutions) without materializing rebased copies.
// fn(lo, hi, values) receives cells [lo, hi) and one value per function.
struct Segment {
    std::int64_t lo;
    std::int64_t hi;
};
std::pair<std::int64_t, std::int64_t> common_grid_of(const std::vector<const StepFunction*>& fs);
void sweep(const std::vector<const StepFunction*>& fs,
           const std::function<void(std::int64_t, std::int64_t, const std::vector<const Rat*>&)>& fn);

// Values times a common denominator, one integer per cell of one period.
struct IntCoded {
    std::int64_t cells = 0;
    std::int64_t res = 1;
    BigInt den{1};
    std::vector<std::int64_t> num;
};
IntCoded int_coded(const StepFunction& f, std::int64_t cell_cap = std::int64_t{1} << 28);

// (1/m) sum_{k=n}^{n+m-1} f(x + k^2), x given as a cell index.
Rat avg_along_squares_cell(const StepFunction& f, std::int64_t cell, std::int64_t n, std::int64_t m);
Rat avg_along_squares(const StepFunction& f, std::int64_t x, std::int64_t n, std::int64_t m);
// Integer sum on the coded form: sum_{k=n}^{n+m-1} num[cell + k^2 R].
std::int64_t coded_square_sum(const IntCoded& f, std::int64_t cell, std::int64_t n, std::int64_t m);

struct RearrangementReport {
    std::int64_t tau = 0;
    std::int64_t checked = 0;
    std::int64_t failed = 0;
    Rat min_average;
    Rat threshold;   // (1 - rho) measure(F)
    std::int64_t witness_x = -1;
    std::int64_t witness_n = -1;
    bool pass() const { return failed == 0; }
};

// (1/tau) sum_{k=n}^{n+tau-1} chi_{F^tau}(x + k^2) >= (1 - rho) measure(F) for every
// x in [0,tau) and every n in n_samples.
RearrangementReport rearrangement_check(const PeriodicIntSet& F, std::int64_t tau, const Rat& rho,
                          const std::vector<std::int64_t>& n_samples);

struct RearrangementSearch {
    std::int64_t tau = 0;   // 0 if none found
    RearrangementReport report;
    std::int64_t tried = 0;
};
// Smallest prime tau in (period(F), tau_max] for which rearrangement_check passes.
RearrangementSearch rearrangement_search(const PeriodicIntSet& F, const Rat& rho, std::int64_t tau_max,
                           const std::vector<std::int64_t>& n_samples);

}  // namespace sqavg
