#include "sqavg/step_function.hpp"

#include "sqavg/modulus.hpp"
#include "sqavg/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace sqavg {

namespace {

const Rat kZero(0);

void check_cells(std::int64_t period, std::int64_t res)
{
    std::int64_t cells;
    if (period < 1 || res < 1) throw ContractError("step function grid must be positive");
    if (__builtin_mul_overflow(period, res, &cells) || cells > limits().period_cap)
        throw ScaleError("step function needs " + std::to_string(period) + "x" + std::to_string(res) +
                         " cells, above the period cap");
}

constexpr std::int64_t kRunCap = std::int64_t{1} << 27;

}  // namespace

StepFunction::StepFunction() { runs_.push_back({0, 1, Rat(0)}); }

void StepFunction::coalesce()
{
    std::vector<Run> out;
    out.reserve(runs_.size());
    for (auto& r : runs_) {
        if (r.hi <= r.lo) continue;
        if (!out.empty() && out.back().value == r.value)
            out.back().hi = r.hi;
        else
            out.push_back(std::move(r));
    }
    runs_ = std::move(out);
    if (runs_.size() == 1) {
        period_ = res_ = 1;
        runs_[0].lo = 0;
        runs_[0].hi = 1;
    }
}

StepFunction StepFunction::constant(const Rat& c)
{
    StepFunction f;
    f.runs_[0].value = c;
    return f;
}

StepFunction StepFunction::indicator(const PeriodicIntSet& s, const Rat& value)
{
    StepFunction f;
    f.period_ = s.period();
    f.res_ = s.resolution();
    f.runs_.clear();
    std::int64_t prev = 0;
    for (const auto& iv : s.intervals()) {
        if (iv.lo > prev) f.runs_.push_back({prev, iv.lo, Rat(0)});
        f.runs_.push_back({iv.lo, iv.hi, value});
        prev = iv.hi;
    }
    if (prev < s.cells()) f.runs_.push_back({prev, s.cells(), Rat(0)});
    f.coalesce();
    return f;
}

StepFunction StepFunction::from_runs(std::int64_t period, std::int64_t resolution, std::vector<Run> runs)
{
    check_cells(period, resolution);
    const std::int64_t n = period * resolution;
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.lo < b.lo; });
    StepFunction f;
    f.period_ = period;
    f.res_ = resolution;
    f.runs_.clear();
    f.runs_.reserve(runs.size() * 2 + 1);
    std::int64_t prev = 0;
    for (auto& r : runs) {
        if (r.hi <= r.lo) continue;
        if (r.lo < prev || r.hi > n) throw ContractError("from_runs: runs overlap or leave [0, P*R)");
        if (r.lo > prev) f.runs_.push_back({prev, r.lo, Rat(0)});
        prev = r.hi;
        f.runs_.push_back(std::move(r));
    }
    if (prev < n) f.runs_.push_back({prev, n, Rat(0)});
    f.coalesce();
    return f;
}

StepFunction StepFunction::from_pieces(const std::vector<std::pair<PeriodicIntSet, Rat>>& pieces)
{
    std::int64_t P = 1, R = 1;
    for (const auto& [s, v] : pieces) std::tie(P, R) = common_grid(P, R, s.period(), s.resolution());
    std::vector<Run> runs;
    for (const auto& [s, v] : pieces) {
        if (v == 0) continue;
        auto r = s.rebased(P, R);
        for (const auto& iv : r.intervals()) runs.push_back({iv.lo, iv.hi, v});
    }
    return from_runs(P, R, std::move(runs));
}

const Rat& StepFunction::at_cell(std::int64_t cell) const
{
    const std::int64_t c = mod_floor(cell, cells());
    auto it = std::upper_bound(runs_.begin(), runs_.end(), c, [](std::int64_t v, const Run& r) { return v < r.lo; });
    return std::prev(it)->value;
}

Rat StepFunction::mean() const
{
    Rat s(0);
    for (const auto& r : runs_) s += Rat(r.hi - r.lo) * r.value;
    return s / Rat(cells());
}

Rat StepFunction::max_value() const
{
    Rat m = runs_[0].value;
    for (const auto& r : runs_) m = std::max(m, r.value);
    return m;
}

std::vector<Rat> StepFunction::range() const
{
    std::vector<Rat> v;
    for (const auto& r : runs_) v.push_back(r.value);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

PeriodicIntSet StepFunction::where(const std::function<bool(const Rat&)>& pred) const
{
    std::vector<Interval> iv;
    for (const auto& r : runs_)
        if (pred(r.value)) iv.push_back({r.lo, r.hi});
    return PeriodicIntSet::from_intervals(period_, std::move(iv), res_);
}

PeriodicIntSet StepFunction::level_set(const Rat& v) const
{
    return where([&](const Rat& x) { return x == v; });
}

PeriodicIntSet StepFunction::support() const
{
    return where([](const Rat& x) { return x != 0; });
}

std::map<Rat, Rat> StepFunction::masses_on(const PeriodicIntSet& on) const
{
    auto ind = indicator(on);
    std::map<Rat, std::int64_t> len;
    auto [P, R] = common_grid_of({this, &ind});
    sweep({this, &ind}, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        if (*v[1] != 0) len[*v[0]] += hi - lo;
    });
    std::map<Rat, Rat> out;
    const Rat total(BigInt(P) * R);
    for (const auto& [k, l] : len) out[k] = Rat(l) / total;
    return out;
}

StepFunction StepFunction::rebased(std::int64_t period, std::int64_t resolution) const
{
    if (period % period_ != 0 || resolution % res_ != 0)
        throw ContractError("rebase target must be a multiple of period and resolution");
    if (period == period_ && resolution == res_) return *this;
    check_cells(period, resolution);
    const std::int64_t f = resolution / res_;
    const std::int64_t copies = period / period_;
    const std::int64_t stride = period_ * resolution;
    if (static_cast<std::int64_t>(runs_.size()) > kRunCap / copies)
        throw ScaleError("rebasing a step function would exceed the run cap");
    StepFunction g;
    g.period_ = period;
    g.res_ = resolution;
    g.runs_.clear();
    g.runs_.reserve(runs_.size() * static_cast<std::size_t>(copies));
    for (std::int64_t k = 0; k < copies; ++k)
        for (const auto& r : runs_) g.runs_.push_back({r.lo * f + k * stride, r.hi * f + k * stride, r.value});
    if (g.runs_.size() == 1) return *this;
    // adjacent copies may join
    std::vector<Run> out;
    for (auto& r : g.runs_) {
        if (!out.empty() && out.back().value == r.value)
            out.back().hi = r.hi;
        else
            out.push_back(std::move(r));
    }
    g.runs_ = std::move(out);
    return g;
}

StepFunction StepFunction::scaled(const Rat& c) const
{
    if (c == 0) return StepFunction();
    StepFunction g = *this;
    for (auto& r : g.runs_) r.value *= c;
    return g;
}

StepFunction StepFunction::restricted(const PeriodicIntSet& s) const
{
    auto ind = indicator(s);
    auto [P, R] = common_grid_of({this, &ind});
    std::vector<Run> runs;
    sweep({this, &ind}, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        if (*v[1] != 0 && *v[0] != 0) runs.push_back({lo, hi, *v[0]});
    });
    return from_runs(P, R, std::move(runs));
}

StepFunction StepFunction::minimal() const
{
    if (runs_.size() == 1) return *this;
    StepFunction cur = *this;
    std::int64_t g = cur.res_;
    for (const auto& r : cur.runs_) g = gcd64(g, gcd64(r.lo, r.hi));
    if (g > 1) {
        for (auto& r : cur.runs_) {
            r.lo /= g;
            r.hi /= g;
        }
        cur.res_ /= g;
    }
    for (auto p : prime_factors(static_cast<std::uint64_t>(cur.period_))) {
        const auto pp = static_cast<std::int64_t>(p);
        while (cur.period_ % pp == 0) {
            const std::int64_t sub = cur.period_ / pp;
            const std::int64_t n = sub * cur.res_;
            std::vector<Run> head;
            for (const auto& r : cur.runs_) {
                if (r.lo >= n) break;
                head.push_back({r.lo, std::min(r.hi, n), r.value});
            }
            StepFunction cand = from_runs(sub, cur.res_, head);
            if (!(cand == cur)) break;
            cur = std::move(cand);
            if (cur.runs_.size() == 1) return cur;
        }
    }
    return cur;
}

StepFunction StepFunction::translate_units(std::int64_t units) const
{
    if (runs_.size() == 1) return *this;
    const std::int64_t n = cells();
    const std::int64_t shift = mod_floor(units, period_) * res_;
    std::vector<Run> out;
    out.reserve(runs_.size() + 1);
    for (const auto& r : runs_) {
        std::int64_t a = r.lo + shift, b = r.hi + shift;
        if (a >= n) {
            out.push_back({a - n, b - n, r.value});
        } else if (b > n) {
            out.push_back({a, n, r.value});
            out.push_back({0, b - n, r.value});
        } else {
            out.push_back({a, b, r.value});
        }
    }
    return from_runs(period_, res_, std::move(out));
}

bool StepFunction::operator==(const StepFunction& o) const
{
    if (period_ == o.period_ && res_ == o.res_) {
        if (runs_.size() != o.runs_.size()) return false;
        for (std::size_t i = 0; i < runs_.size(); ++i)
            if (runs_[i].lo != o.runs_[i].lo || runs_[i].hi != o.runs_[i].hi || runs_[i].value != o.runs_[i].value)
                return false;
        return true;
    }
    bool same = true;
    sweep({this, &o}, [&](std::int64_t, std::int64_t, const std::vector<const Rat*>& v) {
        if (*v[0] != *v[1]) same = false;
    });
    return same;
}

std::pair<std::int64_t, std::int64_t> common_grid_of(const std::vector<const StepFunction*>& fs)
{
    std::int64_t P = 1, R = 1;
    for (const auto* f : fs) std::tie(P, R) = common_grid(P, R, f->period(), f->resolution());
    return {P, R};
}

void sweep(const std::vector<const StepFunction*>& fs,
           const std::function<void(std::int64_t, std::int64_t, const std::vector<const Rat*>&)>& fn)
{
    auto [P, R] = common_grid_of(fs);
    const std::int64_t n = P * R;
    struct Cursor {
        const StepFunction* f;
        std::int64_t scale;
        std::int64_t stride;
        std::int64_t rep = 0;
        std::size_t idx = 0;
        std::int64_t end() const { return f->runs()[idx].hi * scale + rep * stride; }
    };
    std::vector<Cursor> cur;
    cur.reserve(fs.size());
    for (const auto* f : fs) cur.push_back({f, R / f->resolution(), f->period() * R});
    std::vector<const Rat*> vals(fs.size());
    std::int64_t pos = 0;
    while (pos < n) {
        std::int64_t next = n;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            vals[i] = &cur[i].f->runs()[cur[i].idx].value;
            next = std::min(next, cur[i].end());
        }
        fn(pos, next, vals);
        pos = next;
        for (auto& c : cur) {
            if (c.end() == next) {
                if (++c.idx == c.f->runs().size()) {
                    c.idx = 0;
                    ++c.rep;
                }
            }
        }
    }
}

namespace {

StepFunction combine_values(const StepFunction& a, const StepFunction& b,
                            const std::function<Rat(const Rat&, const Rat&)>& op)
{
    auto [P, R] = common_grid_of({&a, &b});
    std::vector<Run> runs;
    sweep({&a, &b}, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        Rat r = op(*v[0], *v[1]);
        if (r == 0) return;
        if (!runs.empty() && runs.back().hi == lo && runs.back().value == r)
            runs.back().hi = hi;
        else
            runs.push_back({lo, hi, std::move(r)});
    });
    return StepFunction::from_runs(P, R, std::move(runs));
}

}  // namespace

StepFunction operator+(const StepFunction& a, const StepFunction& b)
{
    return combine_values(a, b, [](const Rat& x, const Rat& y) { return Rat(x + y); });
}

StepFunction pointwise_min(const StepFunction& a, const StepFunction& b)
{
    return combine_values(a, b, [](const Rat& x, const Rat& y) { return x < y ? x : y; });
}

bool pointwise_le(const StepFunction& a, const StepFunction& b)
{
    bool ok = true;
    sweep({&a, &b}, [&](std::int64_t, std::int64_t, const std::vector<const Rat*>& v) {
        if (*v[0] > *v[1]) ok = false;
    });
    return ok;
}

IntCoded int_coded(const StepFunction& f, std::int64_t cell_cap)
{
    if (f.cells() > cell_cap) throw ScaleError("integer coding exceeds the cell cap");
    IntCoded c;
    c.cells = f.cells();
    c.res = f.resolution();
    BigInt den(1);
    for (const auto& r : f.runs()) den = lcm(den, BigInt(r.value.get_den()));
    c.den = den;
    c.num.assign(static_cast<std::size_t>(c.cells), 0);
    for (const auto& r : f.runs()) {
        BigInt v = r.value.get_num() * (den / r.value.get_den());
        if (!fits_int64(v)) throw ScaleError("coded value exceeds 64 bits");
        const std::int64_t vi = v.get_si();
        std::fill(c.num.begin() + r.lo, c.num.begin() + r.hi, vi);
    }
    return c;
}

std::int64_t coded_square_sum(const IntCoded& f, std::int64_t cell, std::int64_t n, std::int64_t m)
{
    const std::int64_t P = f.cells / f.res;
    std::int64_t sq = static_cast<std::int64_t>((static_cast<__int128>(mod_floor(n, P)) * mod_floor(n, P)) % P);
    std::int64_t step = mod_floor(2 * mod_floor(n, P) + 1, P);   // (k+1)^2 - k^2 = 2k+1 mod P
    const std::int64_t base = mod_floor(cell, f.cells);
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < m; ++i) {
        std::int64_t pos = base + sq * f.res;
        if (pos >= f.cells) pos -= f.cells;
        total += f.num[static_cast<std::size_t>(pos)];
        sq += step;
        if (sq >= P) sq -= P;
        step = (step + 2) % P;
    }
    return total;
}

Rat avg_along_squares_cell(const StepFunction& f, std::int64_t cell, std::int64_t n, std::int64_t m)
{
    if (m < 1) throw ContractError("avg_along_squares: m must be positive");
    const std::int64_t P = f.period();
    const std::int64_t R = f.resolution();
    std::vector<std::int64_t> hits(f.runs().size(), 0);
    std::int64_t sq = static_cast<std::int64_t>((static_cast<__int128>(mod_floor(n, P)) * mod_floor(n, P)) % P);
    std::int64_t step = mod_floor(2 * mod_floor(n, P) + 1, P);
    const std::int64_t base = mod_floor(cell, f.cells());
    const auto& runs = f.runs();
    for (std::int64_t i = 0; i < m; ++i) {
        std::int64_t pos = base + sq * R;
        if (pos >= f.cells()) pos -= f.cells();
        auto it = std::upper_bound(runs.begin(), runs.end(), pos, [](std::int64_t v, const Run& r) { return v < r.lo; });
        ++hits[static_cast<std::size_t>(std::prev(it) - runs.begin())];
        sq += step;
        if (sq >= P) sq -= P;
        step = (step + 2) % P;
    }
    Rat s(0);
    for (std::size_t i = 0; i < hits.size(); ++i)
        if (hits[i]) s += Rat(hits[i]) * runs[i].value;
    return s / Rat(m);
}

Rat avg_along_squares(const StepFunction& f, std::int64_t x, std::int64_t n, std::int64_t m)
{
    return avg_along_squares_cell(f, x * f.resolution(), n, m);
}

RearrangementReport rearrangement_check(const PeriodicIntSet& F, std::int64_t tau, const Rat& rho,
                          const std::vector<std::int64_t>& n_samples)
{
    if (F.resolution() != 1) throw ContractError("rearrangement_check: F must have unit resolution");
    if (!is_prime(static_cast<std::uint64_t>(tau))) throw ContractError("rearrangement_check: tau must be prime");
    auto Ft = rearrange(F, tau);
    std::vector<std::uint8_t> chi(static_cast<std::size_t>(tau), 0);
    for (std::int64_t x = 0; x < tau; ++x) chi[static_cast<std::size_t>(x)] = Ft.contains_unit(x);
    RearrangementReport rep;
    rep.tau = tau;
    rep.threshold = (1 - rho) * F.measure();
    rep.min_average = Rat(1);
    // multiplicity of k^2 mod tau over k in [n, n+tau)
    auto mult_for = [&](std::int64_t n) {
        std::vector<std::int64_t> mult(static_cast<std::size_t>(tau), 0);
        for (std::int64_t k = n; k < n + tau; ++k) {
            std::int64_t r = mod_floor(k, tau);
            ++mult[static_cast<std::size_t>(static_cast<std::int64_t>((static_cast<__int128>(r) * r) % tau))];
        }
        return mult;
    };
    std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> cache;   // mult -> sums
    for (auto n : n_samples) {
        auto mult = mult_for(n);
        const std::vector<std::int64_t>* sums = nullptr;
        for (const auto& [m, s] : cache)
            if (m == mult) sums = &s;
        if (!sums) {
            std::vector<std::pair<std::int64_t, std::int64_t>> sq;
            for (std::int64_t r = 0; r < tau; ++r)
                if (mult[static_cast<std::size_t>(r)]) sq.emplace_back(r, mult[static_cast<std::size_t>(r)]);
            std::vector<std::int64_t> s(static_cast<std::size_t>(tau), 0);
            parallel_chunks(tau, [&](std::int64_t b, std::int64_t e, std::size_t) {
                for (std::int64_t x = b; x < e; ++x) {
                    std::int64_t acc = 0;
                    for (const auto& [r, c] : sq) {
                        std::int64_t y = x + r;
                        if (y >= tau) y -= tau;
                        if (chi[static_cast<std::size_t>(y)]) acc += c;
                    }
                    s[static_cast<std::size_t>(x)] = acc;
                }
            }, 1 << 10);
            cache.emplace_back(mult, std::move(s));
            sums = &cache.back().second;
        }
        for (std::int64_t x = 0; x < tau; ++x) {
            Rat avg(BigInt((*sums)[static_cast<std::size_t>(x)]), BigInt(tau));
            avg.canonicalize();
            ++rep.checked;
            if (avg < rep.min_average) rep.min_average = avg;
            if (avg < rep.threshold) {
                if (rep.failed == 0) {
                    rep.witness_x = x;
                    rep.witness_n = n;
                }
                ++rep.failed;
            }
        }
    }
    return rep;
}

RearrangementSearch rearrangement_search(const PeriodicIntSet& F, const Rat& rho, std::int64_t tau_max,
                           const std::vector<std::int64_t>& n_samples)
{
    RearrangementSearch s;
    auto tau = static_cast<std::int64_t>(next_prime(static_cast<std::uint64_t>(F.period() + 1)));
    while (tau <= tau_max) {
        ++s.tried;
        auto rep = rearrangement_check(F, tau, rho, n_samples);
        if (rep.pass()) {
            s.tau = tau;
            s.report = rep;
            return s;
        }
        s.report = rep;
        tau = static_cast<std::int64_t>(next_prime(static_cast<std::uint64_t>(tau + 1)));
    }
    return s;
}

}  // namespace sqavg
