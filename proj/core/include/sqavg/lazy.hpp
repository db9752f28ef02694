#pragma once

#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sqavg {

// Exact measure when `exact`, otherwise lo <= measure <= hi.
struct MeasureBound {
    Rat lo;
    Rat hi;
    bool exact = false;

    static MeasureBound of(const Rat& m) { return {m, m, true}; }
};

enum class Tri { No, Yes, Unknown };
const char* to_string(Tri t);

// A periodic union of unit intervals whose period may be far beyond what can
// be stored. Membership is answered per unit; measures come from structural
// rules and fall back to materializing under limits().materialize_cap.
class LazySet {
public:
    enum class Kind { Empty, Full, Leaf, Blocks, Truncated, TailFilled, Intersect, Union, Complement };

    LazySet();   // empty

    static LazySet empty();
    static LazySet full();
    // Unit resolution; ContractError otherwise.
    static LazySet leaf(const PeriodicIntSet& s);
    // Blocks [j w, (j+1) w), included iff D[j w mod q]. Collapses to Empty/Full
    // when every residue reached agrees.
    static LazySet blocks(const BigInt& w, std::int64_t q, std::vector<bool> D);
    // Union of the blocks [j w, (j+1) w) meeting `s` (period of s divides q).
    static LazySet blocks_meeting(const BigInt& w, std::int64_t q, const PeriodicIntSet& s);
    // n in iff r = n mod P satisfies r < cut and r in x.
    static LazySet truncated(const LazySet& x, const BigInt& cut, const BigInt& P);
    // n in iff r = n mod P satisfies r >= cut or r in x.
    static LazySet tail_filled(const LazySet& x, const BigInt& cut, const BigInt& P);

    friend LazySet operator&(const LazySet& a, const LazySet& b);
    friend LazySet operator|(const LazySet& a, const LazySet& b);
    LazySet operator~() const;

    Kind kind() const;
    bool is_empty_node() const { return kind() == Kind::Empty; }
    bool is_full_node() const { return kind() == Kind::Full; }

    bool contains(const BigInt& n) const;
    bool contains(std::int64_t n) const { return contains(BigInt(static_cast<long>(n))); }
    BigInt period() const;

    // Membership over one period as a unit-resolution set, when period <= cap.
    std::optional<PeriodicIntSet> materialize(std::int64_t cap = -1) const;
    // Structural rules first, counting second, bounds last.
    MeasureBound measure() const;
    // Counting first when the period is small enough, then measure().
    MeasureBound measure_counted() const;
    Tri subset_of(const LazySet& other) const;

    // For reporting.
    std::string describe() const;

    struct Node;
    const Node* n_internal() const { return n_.get(); }
    static LazySet wrap(std::shared_ptr<const Node> n) { return LazySet(std::move(n)); }

private:
    std::shared_ptr<const Node> n_;
    explicit LazySet(std::shared_ptr<const Node> n);
};

}  // namespace sqavg
