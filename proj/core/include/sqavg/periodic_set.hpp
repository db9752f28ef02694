#pragma once

#include "sqavg/modulus.hpp"
#include "sqavg/rational.hpp"

#include <cstdint>
#include <vector>

namespace sqavg {

// Half-open run of cells [lo, hi).
struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool operator==(const Interval&) const = default;
};

// gamma = 2^(-c)
struct GammaParam {
    int c = 1;
    Rat gamma{1, 2};

    static GammaParam from_c(int c);
    static GammaParam from_rational(const Rat& g);   // ConfigError unless dyadic 2^-c, c >= 1
    std::int64_t window(int kappa) const;             // gamma * 2^kappa, needs kappa >= c
};

// A P-periodic subset of the real line made of cells of width 1/R.
// Cell c covers [c/R, (c+1)/R); one period holds P*R cells. With R = 1 the
// cells are the unit intervals [n, n+1).
class PeriodicIntSet {
public:
    PeriodicIntSet();   // empty

    static PeriodicIntSet empty_set();
    static PeriodicIntSet full_set();
    // Intervals in cell units; anything outside [0, P*R) is reduced mod P*R.
    static PeriodicIntSet from_intervals(std::int64_t period, std::vector<Interval> cells,
                                         std::int64_t resolution = 1);
    static PeriodicIntSet from_members(std::int64_t period, const std::vector<std::int64_t>& units);
    // Units [lo, hi) reduced mod period.
    static PeriodicIntSet unit_range(std::int64_t period, std::int64_t lo, std::int64_t hi);

    std::int64_t period() const { return period_; }
    std::int64_t resolution() const { return res_; }
    std::int64_t cells() const { return period_ * res_; }
    const std::vector<Interval>& intervals() const { return iv_; }

    Rat measure() const;
    std::int64_t cell_count() const;
    // Cells of this set inside [lo, hi) of one period, 0 <= lo <= hi <= cells().
    std::int64_t cell_count_in(std::int64_t lo, std::int64_t hi) const;
    bool is_empty() const { return iv_.empty(); }
    bool is_full() const;

    bool contains_cell(std::int64_t cell) const;
    bool contains_unit(std::int64_t n) const;   // whole unit [n, n+1) inside

    PeriodicIntSet rebased(std::int64_t period, std::int64_t resolution) const;
    PeriodicIntSet translate(std::int64_t units) const;
    PeriodicIntSet negate() const;
    PeriodicIntSet complement() const;
    // Minkowski sum of unit labels with {0, ..., w-1}.
    PeriodicIntSet add_window(std::int64_t w) const;
    // Grows every run by `left` cells downwards and `right` cells upwards.
    PeriodicIntSet dilate_cells(std::int64_t left, std::int64_t right) const;
    // Smallest period and resolution that represent the same real set.
    PeriodicIntSet minimal() const;

    bool subset_of(const PeriodicIntSet& other) const;
    bool operator==(const PeriodicIntSet& other) const;

private:
    std::int64_t period_ = 1;
    std::int64_t res_ = 1;
    std::vector<Interval> iv_;

    void normalize();
    friend PeriodicIntSet combine(const PeriodicIntSet&, const PeriodicIntSet&, int);
};

PeriodicIntSet set_union(const PeriodicIntSet& a, const PeriodicIntSet& b);
PeriodicIntSet set_intersect(const PeriodicIntSet& a, const PeriodicIntSet& b);
PeriodicIntSet set_difference(const PeriodicIntSet& a, const PeriodicIntSet& b);

// Common period/resolution for a group of sets, cap-checked.
std::pair<std::int64_t, std::int64_t> common_grid(std::int64_t p1, std::int64_t r1,
                                                  std::int64_t p2, std::int64_t r2);

// -Lambda_0(q) (or -Lambda_0'(q)) + {0..gamma 2^kappa - 1} + [0,1), q-periodic.
PeriodicIntSet build_lambda_bar(const SquareFreeModulus& q, const GammaParam& g, bool primed);
// [0, gamma 2^kappa) + q Z.
PeriodicIntSet build_xi(const SquareFreeModulus& q, const GammaParam& g);

// tau-periodic rearrangement: F on [0, floor(tau/P) P), empty on the rest of
// [0, tau). P is F's period unless a larger multiple is given as base_period.
PeriodicIntSet rearrange(const PeriodicIntSet& F, std::int64_t tau);
PeriodicIntSet rearrange(const PeriodicIntSet& F, std::int64_t base_period, std::int64_t tau);

}  // namespace sqavg
