#include "sqavg/lazy.hpp"

#include <algorithm>
#include <sstream>

namespace sqavg {

const char* to_string(Tri t)
{
    switch (t) {
    case Tri::No: return "no";
    case Tri::Yes: return "yes";
    default: return "unknown";
    }
}

struct LazySet::Node {
    Kind kind = Kind::Empty;
    PeriodicIntSet leaf;
    BigInt w{1};
    std::int64_t q = 1;
    std::shared_ptr<const std::vector<bool>> D;
    std::int64_t hits = 0;   // j in [0, q) whose block is included
    BigInt cut;
    BigInt P{1};   // period of the node
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const LazySet::Node>;

std::int64_t cap_or_default(std::int64_t cap) { return cap < 0 ? limits().materialize_cap : cap; }

BigInt lcm_big(const BigInt& a, const BigInt& b)
{
    BigInt r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

BigInt mod_big(const BigInt& n, const BigInt& m)
{
    BigInt r;
    mpz_fdiv_r(r.get_mpz_t(), n.get_mpz_t(), m.get_mpz_t());
    return r;
}

bool divides(const BigInt& d, const BigInt& n) { return mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t()) != 0; }

Rat frac(const BigInt& num, const BigInt& den)
{
    Rat r(num, den);
    r.canonicalize();
    return r;
}

// Unit counts of a unit-resolution periodic set over arbitrary ranges.
class Counter {
public:
    explicit Counter(const PeriodicIntSet& s) : s_(s)
    {
        cum_.reserve(s.intervals().size() + 1);
        cum_.push_back(0);
        for (const auto& iv : s.intervals()) cum_.push_back(cum_.back() + iv.hi - iv.lo);
    }
    std::int64_t total() const { return cum_.back(); }
    // members in [0, x) for 0 <= x <= period
    std::int64_t upto(std::int64_t x) const
    {
        const auto& iv = s_.intervals();
        auto it = std::upper_bound(iv.begin(), iv.end(), x, [](std::int64_t v, const Interval& c) { return v < c.lo; });
        const std::size_t i = static_cast<std::size_t>(it - iv.begin());
        if (i == 0) return 0;
        const Interval& last = iv[i - 1];
        return cum_[i - 1] + std::min(x, last.hi) - last.lo;
    }
    // members in [r, r + len) modulo the period
    BigInt count(std::int64_t r, const BigInt& len) const
    {
        const std::int64_t P = s_.period();
        BigInt full = len / P;
        const std::int64_t rem = BigInt(len - full * P).get_si();
        BigInt out = full * total();
        const std::int64_t start = mod_floor(r, P);
        if (start + rem <= P)
            out += upto(start + rem) - upto(start);
        else
            out += (total() - upto(start)) + upto(start + rem - P);
        return out;
    }
    // some member in [r, r + len) modulo the period
    bool meets(std::int64_t r, const BigInt& len) const { return count(r, len) > 0; }

private:
    const PeriodicIntSet& s_;
    std::vector<std::int64_t> cum_;
};

// Visits j = 0..q-1 with r = j w mod q.
template <class Fn>
void for_each_block(const BigInt& w, std::int64_t q, Fn&& fn)
{
    const std::int64_t wm = BigInt(w % q).get_si();
    std::int64_t r = 0;
    for (std::int64_t j = 0; j < q; ++j) {
        fn(r);
        r += wm;
        if (r >= q) r -= q;
    }
}

NodeP make(LazySet::Node n) { return std::make_shared<const LazySet::Node>(std::move(n)); }

}  // namespace

LazySet::LazySet() : n_(make(Node{})) {}
LazySet::LazySet(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

LazySet LazySet::empty() { return LazySet(); }

LazySet LazySet::full()
{
    Node n;
    n.kind = Kind::Full;
    return LazySet(make(std::move(n)));
}

LazySet LazySet::leaf(const PeriodicIntSet& s)
{
    PeriodicIntSet m = s.minimal();
    if (m.is_empty()) return empty();
    if (m.is_full()) return full();
    if (m.resolution() != 1) throw ContractError("LazySet leaves must have unit resolution");
    Node n;
    n.kind = Kind::Leaf;
    n.P = BigInt(static_cast<long>(m.period()));
    n.leaf = std::move(m);
    return LazySet(make(std::move(n)));
}

LazySet LazySet::blocks(const BigInt& w, std::int64_t q, std::vector<bool> D)
{
    if (w <= 0 || q < 1 || static_cast<std::int64_t>(D.size()) != q)
        throw ContractError("blocks: need w > 0, q >= 1 and |D| = q");
    std::int64_t hits = 0;
    for_each_block(w, q, [&](std::int64_t r) { hits += D[static_cast<std::size_t>(r)] ? 1 : 0; });
    if (hits == 0) return empty();
    if (hits == q) return full();
    Node n;
    n.kind = Kind::Blocks;
    n.w = w;
    n.q = q;
    n.hits = hits;
    n.D = std::make_shared<const std::vector<bool>>(std::move(D));
    n.P = w * q;
    return LazySet(make(std::move(n)));
}

LazySet LazySet::blocks_meeting(const BigInt& w, std::int64_t q, const PeriodicIntSet& s)
{
    PeriodicIntSet m = s.minimal();
    if (q % m.period() != 0) throw ContractError("blocks_meeting: period of s must divide q");
    if (m.is_empty()) return empty();
    if (m.is_full()) return full();
    std::vector<bool> D(static_cast<std::size_t>(q), false);
    if (w >= q) {
        D.assign(static_cast<std::size_t>(q), true);
    } else if (m.resolution() == 1) {
        const Counter c(m);
        for (std::int64_t r = 0; r < q; ++r) D[static_cast<std::size_t>(r)] = c.meets(r, w);
    } else {
        // sub-unit cells: a block meets s if any cell of its units is in s
        const std::int64_t R = m.resolution();
        const std::int64_t wl = w.get_si();
        for (std::int64_t r = 0; r < q; ++r) {
            const std::int64_t lo = mod_floor(r, m.period()) * R;
            std::int64_t left = wl * R;
            std::int64_t pos = lo;
            bool hit = false;
            while (left > 0 && !hit) {
                const std::int64_t take = std::min(left, m.cells() - pos);
                hit = m.cell_count_in(pos, pos + take) > 0;
                left -= take;
                pos = 0;
            }
            D[static_cast<std::size_t>(r)] = hit;
        }
    }
    return blocks(w, q, std::move(D));
}

LazySet LazySet::truncated(const LazySet& x, const BigInt& cut, const BigInt& P)
{
    if (P <= 0) throw ContractError("truncated: period must be positive");
    if (cut <= 0 || x.is_empty_node()) return empty();
    if (cut >= P && divides(x.period(), P)) return x;
    Node n;
    n.kind = Kind::Truncated;
    n.a = x.n_;
    n.cut = cut;
    n.P = P;
    return LazySet(make(std::move(n)));
}

LazySet LazySet::tail_filled(const LazySet& x, const BigInt& cut, const BigInt& P)
{
    if (P <= 0) throw ContractError("tail_filled: period must be positive");
    if (cut <= 0 || x.is_full_node()) return full();
    if (cut >= P && divides(x.period(), P)) return x;
    Node n;
    n.kind = Kind::TailFilled;
    n.a = x.n_;
    n.cut = cut;
    n.P = P;
    return LazySet(make(std::move(n)));
}

LazySet operator&(const LazySet& a, const LazySet& b)
{
    if (a.is_empty_node() || b.is_full_node()) return a;
    if (b.is_empty_node() || a.is_full_node()) return b;
    if (a.n_ == b.n_) return a;
    LazySet::Node n;
    n.kind = LazySet::Kind::Intersect;
    n.a = a.n_;
    n.b = b.n_;
    n.P = lcm_big(a.period(), b.period());
    return LazySet(make(std::move(n)));
}

LazySet operator|(const LazySet& a, const LazySet& b)
{
    if (a.is_full_node() || b.is_empty_node()) return a;
    if (b.is_full_node() || a.is_empty_node()) return b;
    if (a.n_ == b.n_) return a;
    LazySet::Node n;
    n.kind = LazySet::Kind::Union;
    n.a = a.n_;
    n.b = b.n_;
    n.P = lcm_big(a.period(), b.period());
    return LazySet(make(std::move(n)));
}

LazySet LazySet::operator~() const
{
    switch (kind()) {
    case Kind::Empty: return full();
    case Kind::Full: return empty();
    case Kind::Leaf: return leaf(n_->leaf.complement());
    case Kind::Complement: return LazySet(n_->a);
    default: break;
    }
    Node n;
    n.kind = Kind::Complement;
    n.a = n_;
    n.P = n_->P;
    return LazySet(make(std::move(n)));
}

LazySet::Kind LazySet::kind() const { return n_->kind; }
BigInt LazySet::period() const { return n_->P; }

bool LazySet::contains(const BigInt& x) const
{
    const Node& n = *n_;
    switch (n.kind) {
    case Kind::Empty: return false;
    case Kind::Full: return true;
    case Kind::Leaf: return n.leaf.contains_unit(mod_big(x, n.P).get_si());
    case Kind::Blocks: {
        BigInt j;
        mpz_fdiv_q(j.get_mpz_t(), x.get_mpz_t(), n.w.get_mpz_t());
        const BigInt r = mod_big(j * n.w, BigInt(static_cast<long>(n.q)));
        return (*n.D)[static_cast<std::size_t>(r.get_si())];
    }
    case Kind::Truncated: {
        const BigInt r = mod_big(x, n.P);
        return r < n.cut && LazySet(n.a).contains(r);
    }
    case Kind::TailFilled: {
        const BigInt r = mod_big(x, n.P);
        return r >= n.cut || LazySet(n.a).contains(r);
    }
    case Kind::Intersect: return LazySet(n.a).contains(x) && LazySet(n.b).contains(x);
    case Kind::Union: return LazySet(n.a).contains(x) || LazySet(n.b).contains(x);
    case Kind::Complement: return !LazySet(n.a).contains(x);
    }
    return false;
}

namespace {

std::optional<PeriodicIntSet> mat(const LazySet& s, std::int64_t cap);

// x cut to [0, cut) (or filled on [cut, P)) and repeated with period P.
std::optional<PeriodicIntSet> mat_cut(const LazySet& x, const BigInt& cutb, const BigInt& Pb, bool fill,
                                      std::int64_t cap)
{
    const std::int64_t P = Pb.get_si();
    const std::int64_t cut = cutb >= Pb ? P : cutb.get_si();
    auto xs = mat(x, cap);
    if (!xs) return std::nullopt;
    const std::int64_t Px = xs->period();
    std::vector<Interval> iv;
    for (std::int64_t base = 0; base < cut; base += Px) {
        for (const auto& c : xs->intervals()) {
            const std::int64_t lo = base + c.lo;
            if (lo >= cut) break;
            iv.push_back({lo, std::min(cut, base + c.hi)});
        }
        if (static_cast<std::int64_t>(iv.size()) > cap) throw ScaleError("materialize: interval count above cap");
    }
    if (fill && cut < P) iv.push_back({cut, P});
    return PeriodicIntSet::from_intervals(P, std::move(iv), 1);
}

std::optional<PeriodicIntSet> mat(const LazySet& s, std::int64_t cap)
{
    if (s.period() > cap) return std::nullopt;
    const LazySet::Node& n = *s.n_internal();
    switch (n.kind) {
    case LazySet::Kind::Empty: return PeriodicIntSet::empty_set();
    case LazySet::Kind::Full: return PeriodicIntSet::full_set();
    case LazySet::Kind::Leaf: return n.leaf;
    case LazySet::Kind::Blocks: {
        const std::int64_t w = n.w.get_si();
        std::vector<Interval> iv;
        std::int64_t j = 0;
        for_each_block(n.w, n.q, [&](std::int64_t r) {
            if ((*n.D)[static_cast<std::size_t>(r)]) iv.push_back({j * w, (j + 1) * w});
            ++j;
        });
        return PeriodicIntSet::from_intervals(n.P.get_si(), std::move(iv), 1);
    }
    case LazySet::Kind::Truncated: return mat_cut(LazySet::wrap(n.a), n.cut, n.P, false, cap);
    case LazySet::Kind::TailFilled: return mat_cut(LazySet::wrap(n.a), n.cut, n.P, true, cap);
    case LazySet::Kind::Intersect:
    case LazySet::Kind::Union: {
        auto a = mat(LazySet::wrap(n.a), cap);
        if (!a) return std::nullopt;
        auto b = mat(LazySet::wrap(n.b), cap);
        if (!b) return std::nullopt;
        return n.kind == LazySet::Kind::Intersect ? set_intersect(*a, *b) : set_union(*a, *b);
    }
    case LazySet::Kind::Complement: {
        auto a = mat(LazySet::wrap(n.a), cap);
        if (!a) return std::nullopt;
        return a->complement();
    }
    }
    return std::nullopt;
}

MeasureBound product(const MeasureBound& x, const MeasureBound& y)
{
    return {x.lo * y.lo, x.hi * y.hi, x.exact && y.exact};
}

}  // namespace

std::optional<PeriodicIntSet> LazySet::materialize(std::int64_t cap) const { return mat(*this, cap_or_default(cap)); }

namespace {

MeasureBound measure_of(const LazySet& s);

MeasureBound cut_measure(const LazySet& x, const BigInt& cutb, const BigInt& P)
{
    const BigInt cut = cutb > P ? P : cutb;
    const BigInt Px = x.period();
    const MeasureBound mx = measure_of(x);
    if (divides(Px, cut)) {
        const Rat f = frac(cut, P);
        return {mx.lo * f, mx.hi * f, mx.exact};
    }
    const BigInt full = cut / Px;
    const BigInt rem = cut - full * Px;
    if (auto xs = x.materialize()) {
        const Counter c(*xs);
        const BigInt cnt = full * c.total() + c.upto(rem.get_si());
        return MeasureBound::of(frac(cnt, P));
    }
    const Rat base = frac(full * Px, P);
    return {mx.lo * base, mx.hi * base + frac(rem, P), false};
}

MeasureBound block_sum(const LazySet::Node& blk, const PeriodicIntSet& x)
{
    const Counter c(x);
    BigInt total = 0;
    for_each_block(blk.w, blk.q, [&](std::int64_t r) {
        if ((*blk.D)[static_cast<std::size_t>(r)]) total += c.count(r, blk.w);
    });
    return MeasureBound::of(frac(total, blk.P));
}

MeasureBound intersect_measure(const LazySet& a, const LazySet& b)
{
    for (int side = 0; side < 2; ++side) {
        const LazySet& blk = side == 0 ? a : b;
        const LazySet& other = side == 0 ? b : a;
        if (blk.kind() != LazySet::Kind::Blocks) continue;
        const LazySet::Node& bn = *blk.n_internal();
        const BigInt Po = other.period();
        if (divides(Po, bn.w)) return product(measure_of(blk), measure_of(other));
        if (divides(Po, BigInt(static_cast<long>(bn.q))))
            if (auto xs = other.materialize()) return block_sum(bn, *xs);
    }
    BigInt g;
    const BigInt Pa = a.period(), Pb = b.period();
    mpz_gcd(g.get_mpz_t(), Pa.get_mpz_t(), Pb.get_mpz_t());
    if (g == 1) return product(measure_of(a), measure_of(b));
    if (auto m = (a & b).materialize()) return MeasureBound::of(m->measure());
    const MeasureBound x = measure_of(a), y = measure_of(b);
    Rat lo = x.lo + y.lo - 1;
    if (lo < 0) lo = 0;
    return {lo, std::min(x.hi, y.hi), false};
}

MeasureBound measure_of(const LazySet& s)
{
    const LazySet::Node& n = *s.n_internal();
    switch (n.kind) {
    case LazySet::Kind::Empty: return MeasureBound::of(Rat(0));
    case LazySet::Kind::Full: return MeasureBound::of(Rat(1));
    case LazySet::Kind::Leaf: return MeasureBound::of(n.leaf.measure());
    case LazySet::Kind::Blocks: return MeasureBound::of(frac(BigInt(static_cast<long>(n.hits)), BigInt(static_cast<long>(n.q))));
    case LazySet::Kind::Truncated: return cut_measure(LazySet::wrap(n.a), n.cut, n.P);
    case LazySet::Kind::TailFilled: {
        if (n.cut >= n.P) return cut_measure(LazySet::wrap(n.a), n.P, n.P);
        const MeasureBound m = cut_measure(LazySet::wrap(n.a), n.cut, n.P);
        const Rat tail = frac(n.P - n.cut, n.P);
        return {m.lo + tail, m.hi + tail, m.exact};
    }
    case LazySet::Kind::Complement: {
        const MeasureBound m = measure_of(LazySet::wrap(n.a));
        return {1 - m.hi, 1 - m.lo, m.exact};
    }
    case LazySet::Kind::Intersect: return intersect_measure(LazySet::wrap(n.a), LazySet::wrap(n.b));
    case LazySet::Kind::Union: {
        const LazySet a = LazySet::wrap(n.a), b = LazySet::wrap(n.b);
        const MeasureBound x = measure_of(a), y = measure_of(b);
        if (x.exact && y.exact) {
            const MeasureBound i = intersect_measure(a, b);
            if (i.exact) return MeasureBound::of(x.lo + y.lo - i.lo);
        }
        if (auto m = s.materialize()) return MeasureBound::of(m->measure());
        Rat hi = x.hi + y.hi;
        if (hi > 1) hi = 1;
        return {std::max(x.lo, y.lo), hi, false};
    }
    }
    return {};
}

}  // namespace

MeasureBound LazySet::measure() const { return measure_of(*this); }

MeasureBound LazySet::measure_counted() const
{
    if (auto m = materialize()) return MeasureBound::of(m->measure());
    return measure();
}

namespace {

Tri and_tri(Tri x, Tri y)
{
    if (x == Tri::No || y == Tri::No) return Tri::No;
    if (x == Tri::Yes && y == Tri::Yes) return Tri::Yes;
    return Tri::Unknown;
}

// Blocks of `blk` against a set x whose period divides q.
Tri blocks_vs(const LazySet::Node& blk, const PeriodicIntSet& x, bool blocks_inside)
{
    const Counter c(x);
    bool ok = true;
    for_each_block(blk.w, blk.q, [&](std::int64_t r) {
        if (!ok) return;
        const bool in = (*blk.D)[static_cast<std::size_t>(r)];
        if (blocks_inside && in) ok = c.count(r, blk.w) == blk.w;
        if (!blocks_inside && !in) ok = c.count(r, blk.w) == 0;
    });
    return ok ? Tri::Yes : Tri::No;
}

}  // namespace

Tri LazySet::subset_of(const LazySet& o) const
{
    if (is_empty_node() || o.is_full_node() || n_ == o.n_) return Tri::Yes;
    const Node& a = *n_;
    const Node& b = *o.n_;
    if (a.kind == Kind::Intersect) {
        if (wrap(a.a).subset_of(o) == Tri::Yes || wrap(a.b).subset_of(o) == Tri::Yes) return Tri::Yes;
    }
    if (b.kind == Kind::Union) {
        if (subset_of(wrap(b.a)) == Tri::Yes || subset_of(wrap(b.b)) == Tri::Yes) return Tri::Yes;
    }
    if (b.kind == Kind::Intersect) {
        const Tri t = and_tri(subset_of(wrap(b.a)), subset_of(wrap(b.b)));
        if (t != Tri::Unknown) return t;
    }
    if (a.kind == Kind::Union) {
        const Tri t = and_tri(wrap(a.a).subset_of(o), wrap(a.b).subset_of(o));
        if (t != Tri::Unknown) return t;
    }
    if (a.kind == Kind::Complement && b.kind == Kind::Complement) return wrap(b.a).subset_of(wrap(a.a));
    if (a.kind == Kind::Truncated && b.kind == Kind::Truncated && a.cut == b.cut && a.P == b.P) {
        if (wrap(a.a).subset_of(wrap(b.a)) == Tri::Yes) return Tri::Yes;
    }
    if (a.kind == Kind::Blocks && b.kind == Kind::Blocks && a.w == b.w && a.q == b.q) {
        bool ok = true;
        for_each_block(a.w, a.q, [&](std::int64_t r) {
            if ((*a.D)[static_cast<std::size_t>(r)] && !(*b.D)[static_cast<std::size_t>(r)]) ok = false;
        });
        return ok ? Tri::Yes : Tri::No;
    }
    const BigInt qa(static_cast<long>(a.q)), qb(static_cast<long>(b.q));
    if (a.kind == Kind::Blocks && divides(o.period(), qa))
        if (auto x = o.materialize()) return blocks_vs(a, *x, true);
    if (b.kind == Kind::Blocks && divides(period(), qb))
        if (auto x = materialize()) return blocks_vs(b, *x, false);
    if (lcm_big(period(), o.period()) <= limits().materialize_cap) {
        auto x = materialize();
        auto y = o.materialize();
        if (x && y) return x->subset_of(*y) ? Tri::Yes : Tri::No;
    }
    if (is_full_node()) return o.is_full_node() ? Tri::Yes : Tri::Unknown;
    return Tri::Unknown;
}

std::string LazySet::describe() const
{
    const Node& n = *n_;
    std::ostringstream os;
    switch (n.kind) {
    case Kind::Empty: return "empty";
    case Kind::Full: return "full";
    case Kind::Leaf: os << "leaf(P=" << n.leaf.period() << ")"; break;
    case Kind::Blocks: os << "blocks(w=" << to_string(n.w) << ",q=" << n.q << ",hits=" << n.hits << ")"; break;
    case Kind::Truncated: os << "trunc(" << wrap(n.a).describe() << ",cut=" << to_string(n.cut) << ",P=" << to_string(n.P) << ")"; break;
    case Kind::TailFilled: os << "tail(" << wrap(n.a).describe() << ",cut=" << to_string(n.cut) << ",P=" << to_string(n.P) << ")"; break;
    case Kind::Intersect: os << "(" << wrap(n.a).describe() << " & " << wrap(n.b).describe() << ")"; break;
    case Kind::Union: os << "(" << wrap(n.a).describe() << " | " << wrap(n.b).describe() << ")"; break;
    case Kind::Complement: os << "~" << wrap(n.a).describe(); break;
    }
    return os.str();
}

}  // namespace sqavg
