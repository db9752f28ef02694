#include "sqavg/periodic_set.hpp"

#include <algorithm>
#include <string>

namespace sqavg {

GammaParam GammaParam::from_c(int c)
{
    if (c < 1 || c > 62) throw ConfigError("gamma exponent must be in [1,62]");
    return GammaParam{c, pow2(-c)};
}

GammaParam GammaParam::from_rational(const Rat& g)
{
    if (g <= 0 || g >= 1 || g.get_num() != 1)
        throw ConfigError("gamma must be 2^-c with c >= 1, got " + to_string(g));
    const BigInt& d = g.get_den();
    if (mpz_popcount(d.get_mpz_t()) != 1)
        throw ConfigError("gamma must be dyadic 2^-c, got " + to_string(g));
    return from_c(static_cast<int>(mpz_sizeinbase(d.get_mpz_t(), 2)) - 1);
}

std::int64_t GammaParam::window(int kappa) const
{
    if (kappa < c)
        throw ContractError("gamma*2^kappa < 1: kappa=" + std::to_string(kappa) +
                            " < c_gamma=" + std::to_string(c));
    if (kappa - c > 62) throw ScaleError("window gamma*2^kappa exceeds 64 bits");
    return std::int64_t{1} << (kappa - c);
}

PeriodicIntSet::PeriodicIntSet() = default;

PeriodicIntSet PeriodicIntSet::empty_set() { return PeriodicIntSet(); }

PeriodicIntSet PeriodicIntSet::full_set()
{
    PeriodicIntSet s;
    s.iv_.push_back({0, 1});
    return s;
}

static void check_grid(std::int64_t period, std::int64_t res)
{
    if (period < 1 || res < 1) throw ContractError("period and resolution must be positive");
    std::int64_t cells;
    if (__builtin_mul_overflow(period, res, &cells) || cells > limits().period_cap)
        throw ScaleError("periodic set needs " + std::to_string(period) + "x" +
                         std::to_string(res) + " cells, above the period cap");
}

PeriodicIntSet PeriodicIntSet::from_intervals(std::int64_t period, std::vector<Interval> cells,
                                              std::int64_t resolution)
{
    check_grid(period, resolution);
    PeriodicIntSet s;
    s.period_ = period;
    s.res_ = resolution;
    const std::int64_t n = period * resolution;
    s.iv_.reserve(cells.size() + 2);
    for (const auto& c : cells) {
        if (c.hi <= c.lo) continue;
        if (c.hi - c.lo >= n) {
            s.iv_ = {{0, n}};
            s.normalize();
            return s;
        }
        std::int64_t a = mod_floor(c.lo, n);
        std::int64_t b = a + (c.hi - c.lo);
        if (b <= n) {
            s.iv_.push_back({a, b});
        } else {
            s.iv_.push_back({a, n});
            s.iv_.push_back({0, b - n});
        }
    }
    s.normalize();
    return s;
}

void PeriodicIntSet::normalize()
{
    std::sort(iv_.begin(), iv_.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> out;
    out.reserve(iv_.size());
    for (const auto& c : iv_) {
        if (!out.empty() && c.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, c.hi);
        else
            out.push_back(c);
    }
    iv_ = std::move(out);
    if (iv_.empty()) {
        period_ = res_ = 1;
    } else if (iv_.size() == 1 && iv_[0].lo == 0 && iv_[0].hi == period_ * res_) {
        period_ = res_ = 1;
        iv_ = {{0, 1}};
    }
}

PeriodicIntSet PeriodicIntSet::from_members(std::int64_t period, const std::vector<std::int64_t>& units)
{
    std::vector<Interval> iv;
    iv.reserve(units.size());
    for (auto u : units) iv.push_back({u, u + 1});
    return from_intervals(period, std::move(iv), 1);
}

PeriodicIntSet PeriodicIntSet::unit_range(std::int64_t period, std::int64_t lo, std::int64_t hi)
{
    return from_intervals(period, {{lo, hi}}, 1);
}

Rat PeriodicIntSet::measure() const
{
    Rat r(big(cell_count()), big(cells()));
    r.canonicalize();
    return r;
}

std::int64_t PeriodicIntSet::cell_count() const
{
    std::int64_t n = 0;
    for (const auto& c : iv_) n += c.hi - c.lo;
    return n;
}

std::int64_t PeriodicIntSet::cell_count_in(std::int64_t lo, std::int64_t hi) const
{
    std::int64_t n = 0;
    auto it = std::upper_bound(iv_.begin(), iv_.end(), lo,
                               [](std::int64_t v, const Interval& c) { return v < c.hi; });
    for (; it != iv_.end() && it->lo < hi; ++it) n += std::min(hi, it->hi) - std::max(lo, it->lo);
    return n;
}

bool PeriodicIntSet::is_full() const
{
    return iv_.size() == 1 && iv_[0].lo == 0 && iv_[0].hi == cells();
}

bool PeriodicIntSet::contains_cell(std::int64_t cell) const
{
    std::int64_t c = mod_floor(cell, cells());
    auto it = std::upper_bound(iv_.begin(), iv_.end(), c,
                               [](std::int64_t v, const Interval& x) { return v < x.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return c < it->hi;
}

bool PeriodicIntSet::contains_unit(std::int64_t n) const
{
    std::int64_t a = mod_floor(n, period_) * res_;
    auto it = std::upper_bound(iv_.begin(), iv_.end(), a,
                               [](std::int64_t v, const Interval& x) { return v < x.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return a + res_ <= it->hi;
}

PeriodicIntSet PeriodicIntSet::rebased(std::int64_t period, std::int64_t resolution) const
{
    if (period % period_ != 0 || resolution % res_ != 0)
        throw ContractError("rebase target must be a multiple of period and resolution");
    if (period == period_ && resolution == res_) return *this;
    check_grid(period, resolution);
    const std::int64_t f = resolution / res_;
    const std::int64_t copies = period / period_;
    const std::int64_t stride = period_ * resolution;
    if (is_full()) {
        PeriodicIntSet s;
        s.period_ = period;
        s.res_ = resolution;
        s.iv_ = {{0, period * resolution}};
        return s;
    }
    std::int64_t total;
    if (__builtin_mul_overflow(static_cast<std::int64_t>(iv_.size()), copies, &total) ||
        total > (std::int64_t{1} << 28))
        throw ScaleError("rebasing would create more than 2^28 intervals");
    PeriodicIntSet s;
    s.period_ = period;
    s.res_ = resolution;
    s.iv_.reserve(static_cast<std::size_t>(total));
    for (std::int64_t k = 0; k < copies; ++k)
        for (const auto& c : iv_) s.iv_.push_back({c.lo * f + k * stride, c.hi * f + k * stride});
    s.normalize();
    return s;
}

PeriodicIntSet PeriodicIntSet::translate(std::int64_t units) const
{
    if (is_empty() || is_full()) return *this;
    const std::int64_t shift = mod_floor(units, period_) * res_;
    std::vector<Interval> iv;
    iv.reserve(iv_.size() + 1);
    for (const auto& c : iv_) iv.push_back({c.lo + shift, c.hi + shift});
    return from_intervals(period_, std::move(iv), res_);
}

PeriodicIntSet PeriodicIntSet::negate() const
{
    if (is_empty() || is_full()) return *this;
    const std::int64_t R = res_, P = period_;
    std::vector<Interval> iv;
    iv.reserve(iv_.size() * 3);
    auto emit_unit_part = [&](std::int64_t u, std::int64_t s0, std::int64_t s1) {
        std::int64_t v = mod_floor(-u, P);
        iv.push_back({v * R + s0, v * R + s1});
    };
    for (const auto& c : iv_) {
        std::int64_t a = c.lo, b = c.hi;
        std::int64_t ua = a / R, ub = (b - 1) / R;
        if (ua == ub) {
            emit_unit_part(ua, a - ua * R, b - ua * R);
            continue;
        }
        std::int64_t first_full = ua, last_full = ub;
        if (a % R != 0) {
            emit_unit_part(ua, a - ua * R, R);
            first_full = ua + 1;
        }
        if (b % R != 0) {
            emit_unit_part(ub, 0, b - ub * R);
            last_full = ub - 1;
        }
        if (first_full <= last_full) {
            // units first..last map to -last..-first
            iv.push_back({-last_full * R, (-first_full + 1) * R});
        }
    }
    return from_intervals(P, std::move(iv), R);
}

PeriodicIntSet PeriodicIntSet::complement() const
{
    if (is_empty()) return full_set();
    if (is_full()) return empty_set();
    std::vector<Interval> iv;
    iv.reserve(iv_.size() + 1);
    std::int64_t prev = 0;
    for (const auto& c : iv_) {
        if (c.lo > prev) iv.push_back({prev, c.lo});
        prev = c.hi;
    }
    if (prev < cells()) iv.push_back({prev, cells()});
    PeriodicIntSet s;
    s.period_ = period_;
    s.res_ = res_;
    s.iv_ = std::move(iv);
    s.normalize();
    return s;
}

PeriodicIntSet PeriodicIntSet::add_window(std::int64_t w) const
{
    if (w < 1) throw ContractError("add_window: w must be positive");
    if (is_empty() || is_full()) return *this;
    std::vector<Interval> iv;
    for (const auto& c : iv_) {
        if (c.hi - c.lo >= res_) {
            iv.push_back({c.lo, c.hi + (w - 1) * res_});
        } else {
            for (std::int64_t j = 0; j < w; ++j) iv.push_back({c.lo + j * res_, c.hi + j * res_});
        }
    }
    return from_intervals(period_, std::move(iv), res_);
}

PeriodicIntSet PeriodicIntSet::dilate_cells(std::int64_t left, std::int64_t right) const
{
    if (is_empty() || is_full()) return *this;
    std::vector<Interval> iv;
    iv.reserve(iv_.size() + 1);
    for (const auto& c : iv_) iv.push_back({c.lo - left, c.hi + right});
    return from_intervals(period_, std::move(iv), res_);
}

PeriodicIntSet PeriodicIntSet::minimal() const
{
    if (is_empty() || is_full()) return *this;
    PeriodicIntSet cur = *this;
    std::int64_t g = cur.res_;
    for (const auto& c : cur.iv_) g = gcd64(g, gcd64(c.lo, c.hi));
    if (g > 1) {
        for (auto& c : cur.iv_) {
            c.lo /= g;
            c.hi /= g;
        }
        cur.res_ /= g;
    }
    for (auto p : prime_factors(static_cast<std::uint64_t>(cur.period_))) {
        const auto pp = static_cast<std::int64_t>(p);
        while (cur.period_ % pp == 0) {
            std::int64_t sub = cur.period_ / pp;
            std::int64_t n = sub * cur.res_;
            std::vector<Interval> head;
            for (const auto& c : cur.iv_) {
                if (c.lo >= n) break;
                head.push_back({c.lo, std::min(c.hi, n)});
            }
            PeriodicIntSet cand = from_intervals(sub, head, cur.res_);
            if (!(cand.rebased(cur.period_, cur.res_).iv_ == cur.iv_)) break;
            cur = cand;
        }
    }
    return cur;
}

std::pair<std::int64_t, std::int64_t> common_grid(std::int64_t p1, std::int64_t r1, std::int64_t p2,
                                                  std::int64_t r2)
{
    std::int64_t p = checked_lcm(p1, p2), r = checked_lcm(r1, r2);
    check_grid(p, r);
    return {p, r};
}

// op bit k set <=> output contains cells where (in_a, in_b) == k
PeriodicIntSet combine(const PeriodicIntSet& a, const PeriodicIntSet& b, int op)
{
    auto [P, R] = common_grid(a.period(), a.resolution(), b.period(), b.resolution());
    PeriodicIntSet x = a.rebased(P, R), y = b.rebased(P, R);
    const std::int64_t n = P * R;
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    std::int64_t pos = 0;
    while (pos < n) {
        while (i < x.iv_.size() && x.iv_[i].hi <= pos) ++i;
        while (j < y.iv_.size() && y.iv_[j].hi <= pos) ++j;
        bool ina = i < x.iv_.size() && x.iv_[i].lo <= pos;
        bool inb = j < y.iv_.size() && y.iv_[j].lo <= pos;
        std::int64_t na = i < x.iv_.size() ? (ina ? x.iv_[i].hi : x.iv_[i].lo) : n;
        std::int64_t nb = j < y.iv_.size() ? (inb ? y.iv_[j].hi : y.iv_[j].lo) : n;
        std::int64_t next = std::min({na, nb, n});
        int k = (ina ? 1 : 0) | (inb ? 2 : 0);
        if ((op >> k) & 1) {
            if (!out.empty() && out.back().hi == pos)
                out.back().hi = next;
            else
                out.push_back({pos, next});
        }
        pos = next;
    }
    PeriodicIntSet s;
    s.period_ = P;
    s.res_ = R;
    s.iv_ = std::move(out);
    s.normalize();
    return s;
}

PeriodicIntSet set_union(const PeriodicIntSet& a, const PeriodicIntSet& b)
{
    if (a.is_empty() || b.is_full()) return b;
    if (b.is_empty() || a.is_full()) return a;
    return combine(a, b, 0b1110);
}

PeriodicIntSet set_intersect(const PeriodicIntSet& a, const PeriodicIntSet& b)
{
    if (a.is_empty() || b.is_full()) return a;
    if (b.is_empty() || a.is_full()) return b;
    return combine(a, b, 0b1000);
}

PeriodicIntSet set_difference(const PeriodicIntSet& a, const PeriodicIntSet& b)
{
    if (a.is_empty() || b.is_empty()) return a;
    if (b.is_full()) return PeriodicIntSet::empty_set();
    return combine(a, b, 0b0010);
}

bool PeriodicIntSet::subset_of(const PeriodicIntSet& other) const
{
    return set_difference(*this, other).is_empty();
}

bool PeriodicIntSet::operator==(const PeriodicIntSet& other) const
{
    if (period_ == other.period_ && res_ == other.res_) return iv_ == other.iv_;
    return combine(*this, other, 0b0110).is_empty();
}

PeriodicIntSet build_lambda_bar(const SquareFreeModulus& q, const GammaParam& g, bool primed)
{
    const std::int64_t w = g.window(q.kappa());
    const std::int64_t n = q.q64();
    if (w >= n) return PeriodicIntSet::full_set();
    auto t = square_table(q, primed);
    // members n with (j - n) mod q a residue for some j < w
    std::vector<Interval> iv;
    for (std::int64_t s = 0; s < n; ++s) {
        if (!t[static_cast<std::size_t>(s)]) continue;
        iv.push_back({-s, -s + w});
    }
    return PeriodicIntSet::from_intervals(n, std::move(iv), 1);
}

PeriodicIntSet build_xi(const SquareFreeModulus& q, const GammaParam& g)
{
    const std::int64_t w = g.window(q.kappa());
    const std::int64_t n = q.q64();
    if (w >= n) return PeriodicIntSet::full_set();
    return PeriodicIntSet::unit_range(n, 0, w);
}

PeriodicIntSet rearrange(const PeriodicIntSet& F, std::int64_t tau)
{
    return rearrange(F, F.period(), tau);
}

PeriodicIntSet rearrange(const PeriodicIntSet& F, std::int64_t base_period, std::int64_t tau)
{
    if (base_period % F.period() != 0)
        throw ContractError("rearrange: base period must be a multiple of the set's period");
    if (tau <= base_period)
        throw ContractError("rearrange: tau=" + std::to_string(tau) + " must exceed the period " +
                            std::to_string(base_period));
    const std::int64_t keep = (tau / base_period) * base_period;
    const std::int64_t R = F.resolution();
    if (F.is_empty()) return F;
    check_grid(tau, R);
    std::vector<Interval> iv;
    const std::int64_t copies = keep / F.period();
    const std::int64_t stride = F.period() * R;
    if (static_cast<std::int64_t>(F.intervals().size()) * copies > (std::int64_t{1} << 28))
        throw ScaleError("rearrangement would create more than 2^28 intervals");
    for (std::int64_t k = 0; k < copies; ++k)
        for (const auto& c : F.intervals()) iv.push_back({c.lo + k * stride, c.hi + k * stride});
    if (F.is_full()) iv = {{0, keep * R}};
    return PeriodicIntSet::from_intervals(tau, std::move(iv), R);
}

}  // namespace sqavg
