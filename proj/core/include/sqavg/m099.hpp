#pragma once

#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"
#include "sqavg/step_function.hpp"

#include <cstdint>
#include <vector>

namespace sqavg {

// Ladder values 99/100 2^-l and masses 99/100 2^(-M+l-1), l = 0..M-1.
struct M099Spec {
    int M = 1;

    static M099Spec make(int M);   // ConfigError unless 1 <= M <= 24
    Rat value(int l) const;
    Rat mass(int l) const;
    // Cells per unit that realize every mass exactly: 25 * 2^(M+3);
    // level l takes 99 * 2^l of them.
    std::int64_t unit_cells() const;
    std::int64_t level_cells(int l) const;
    int level_of(const Rat& v) const;   // -1 if v is not on the ladder
    Rat mean() const;                   // sum value*mass = 0.99^2 M 2^(-M-1)
    Rat second_moment() const;
};

// Block order inside one unit: levels 0..M-1 and the zero block M,
// shuffled by a seeded Fisher-Yates pass.
struct M099Layout {
    M099Spec spec;
    std::vector<int> order;
    std::vector<std::int64_t> start;   // start[level] within [0, unit_cells)

    static M099Layout seeded(const M099Spec& spec, std::uint64_t seed);
    int level_at(std::int64_t sub) const;   // M = zero block
};

// X on `on`, zero elsewhere; every cell of `on` carries a full copy of the layout.
StepFunction make_m099(const M099Spec& spec, const PeriodicIntSet& on, std::uint64_t seed);
// K copies on a product grid: copy h reads base-N digit h of the sub-cell index,
// so the copies are independent on `on` by construction.
std::vector<StepFunction> make_m099_product(const M099Spec& spec, const PeriodicIntSet& on, int K,
                                            std::uint64_t seed);

// Exact check of the conditional masses on `on`.
bool is_m099_on(const StepFunction& X, const M099Spec& spec, const PeriodicIntSet& on);
// Exact check with masses at least the targets (values on the ladder or 0).
bool is_super_m099(const StepFunction& X, const M099Spec& spec);

bool pairwise_independent(const StepFunction& X1, const StepFunction& X2, const PeriodicIntSet& on);

// Trims X_super to an exactly M-0.99 distributed X <= X_super that is
// independent from the joint peer values. Inside each joint cell the factor
// c = target / actual keeps a prefix of every run. ContractError if some c > 1.
StepFunction trim_super(const StepFunction& X_super, const std::vector<StepFunction>& peers,
                        const M099Spec& spec);

struct DisjointUnionCheck {
    bool premise = false;      // independent on each part with equal conditional laws
    bool conclusion = false;   // independent on the union
};
DisjointUnionCheck disjoint_union_independence(const StepFunction& X1, const StepFunction& X2,
                                               const PeriodicIntSet& L1, const PeriodicIntSet& L2);

// Pairwise independent copies X_h(u, v) = phi(u + h v) over the ring
// GF(2^(M+3)) x GF(25), whose size equals unit_cells(). One unit holds
// unit_cells()^2 cells, cell = u * N + v.
class AffineDesign {
public:
    AffineDesign(const M099Spec& spec, int K, std::uint64_t seed);

    int copies() const { return K_; }
    std::int64_t field_size() const { return N_; }
    std::int64_t cells() const { return N_ * N_; }
    const M099Spec& spec() const { return spec_; }
    // Ladder level of copy h at a cell, or spec().M for the zero value.
    int level(int h, std::int64_t cell) const;
    StepFunction copy(int h) const;   // period 1, resolution N^2
    // level(h, u * N + v) == level_shifted(u, shift(h, v)); lets a sweep over
    // u reuse one product per column.
    std::int64_t shift(int h, std::int64_t v) const { return mul(h_[static_cast<std::size_t>(h)], v); }
    int level_shifted(std::int64_t u, std::int64_t s) const { return layout_.level_at(add(u, s)); }

private:
    M099Spec spec_;
    M099Layout layout_;
    int K_;
    int m_;
    std::int64_t N_;
    std::uint32_t poly_;
    std::vector<std::int64_t> h_;

    std::int64_t add(std::int64_t x, std::int64_t y) const;
    std::int64_t mul(std::int64_t x, std::int64_t y) const;
};

}  // namespace sqavg
