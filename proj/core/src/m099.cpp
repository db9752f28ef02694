#include "sqavg/m099.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>

namespace sqavg {

M099Spec M099Spec::make(int M)
{
    if (M < 1 || M > 24) throw ConfigError("M must be in [1,24], got " + std::to_string(M));
    return M099Spec{M};
}

Rat M099Spec::value(int l) const { return Rat(99, 100) * pow2(-l); }
Rat M099Spec::mass(int l) const { return Rat(99, 100) * pow2(-M + l - 1); }
std::int64_t M099Spec::unit_cells() const { return std::int64_t{25} << (M + 3); }
std::int64_t M099Spec::level_cells(int l) const { return std::int64_t{99} << l; }

int M099Spec::level_of(const Rat& v) const
{
    for (int l = 0; l < M; ++l)
        if (value(l) == v) return l;
    return -1;
}

Rat M099Spec::mean() const
{
    Rat s(0);
    for (int l = 0; l < M; ++l) s += value(l) * mass(l);
    return s;
}

Rat M099Spec::second_moment() const
{
    Rat s(0);
    for (int l = 0; l < M; ++l) s += value(l) * value(l) * mass(l);
    return s;
}

M099Layout M099Layout::seeded(const M099Spec& spec, std::uint64_t seed)
{
    M099Layout lay;
    lay.spec = spec;
    lay.order.resize(static_cast<std::size_t>(spec.M + 1));
    for (int i = 0; i <= spec.M; ++i) lay.order[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    for (int i = spec.M; i >= 1; --i) {
        const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
        const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(lay.order[static_cast<std::size_t>(i)], lay.order[static_cast<std::size_t>(r % bound)]);
    }
    lay.start.assign(static_cast<std::size_t>(spec.M + 1), 0);
    std::int64_t pos = 0;
    for (int b : lay.order) {
        lay.start[static_cast<std::size_t>(b)] = pos;
        pos += b == spec.M ? spec.unit_cells() - 99 * ((std::int64_t{1} << spec.M) - 1) : spec.level_cells(b);
    }
    return lay;
}

int M099Layout::level_at(std::int64_t sub) const
{
    int best = order[0];
    for (int b : order) {
        if (start[static_cast<std::size_t>(b)] <= sub) best = b;
        else break;
    }
    return best;
}

namespace {

std::int64_t block_len(const M099Spec& spec, int b)
{
    return b == spec.M ? spec.unit_cells() - 99 * ((std::int64_t{1} << spec.M) - 1) : spec.level_cells(b);
}

}  // namespace

std::vector<StepFunction> make_m099_product(const M099Spec& spec, const PeriodicIntSet& on, int K,
                                            std::uint64_t seed)
{
    if (K < 1) throw ContractError("make_m099_product: K must be positive");
    const std::int64_t N = spec.unit_cells();
    std::int64_t NK = 1;
    for (int i = 0; i < K; ++i) NK = checked_mul(NK, N);
    const std::int64_t R = checked_mul(on.resolution(), NK);
    const std::int64_t on_cells = on.cell_count();
    std::vector<StepFunction> out;
    for (int h = 0; h < K; ++h) {
        auto lay = M099Layout::seeded(spec, seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(h + 1)));
        std::int64_t Nh = 1;
        for (int i = 0; i < h; ++i) Nh *= N;
        const std::int64_t cycles = NK / (Nh * N);
        const std::int64_t per_cell = cycles * (spec.M + 1);
        if (on_cells > 0 && per_cell > (std::int64_t{1} << 27) / on_cells)
            throw ScaleError("M-0.99 layout would exceed the run cap");
        std::vector<Run> pattern;
        pattern.reserve(static_cast<std::size_t>(per_cell));
        for (std::int64_t j = 0; j < cycles; ++j) {
            const std::int64_t base = j * Nh * N;
            for (int b : lay.order) {
                const std::int64_t lo = base + lay.start[static_cast<std::size_t>(b)] * Nh;
                const std::int64_t hi = lo + block_len(spec, b) * Nh;
                if (b < spec.M) pattern.push_back({lo, hi, spec.value(b)});
            }
        }
        std::vector<Run> runs;
        runs.reserve(static_cast<std::size_t>(on_cells * static_cast<std::int64_t>(pattern.size())));
        for (const auto& iv : on.intervals())
            for (std::int64_t c = iv.lo; c < iv.hi; ++c)
                for (const auto& r : pattern) runs.push_back({c * NK + r.lo, c * NK + r.hi, r.value});
        out.push_back(StepFunction::from_runs(on.period(), R, std::move(runs)));
    }
    return out;
}

StepFunction make_m099(const M099Spec& spec, const PeriodicIntSet& on, std::uint64_t seed)
{
    return make_m099_product(spec, on, 1, seed)[0];
}

bool is_m099_on(const StepFunction& X, const M099Spec& spec, const PeriodicIntSet& on)
{
    auto masses = X.masses_on(on);
    const Rat lam = on.measure();
    for (const auto& [v, m] : masses) {
        if (v == 0) continue;
        int l = spec.level_of(v);
        if (l < 0) return false;
        if (m != lam * spec.mass(l)) return false;
    }
    for (int l = 0; l < spec.M; ++l) {
        auto it = masses.find(spec.value(l));
        const Rat got = it == masses.end() ? Rat(0) : it->second;
        if (got != lam * spec.mass(l)) return false;
    }
    return true;
}

bool is_super_m099(const StepFunction& X, const M099Spec& spec)
{
    auto masses = X.masses_on(PeriodicIntSet::full_set());
    for (const auto& [v, m] : masses)
        if (v != 0 && spec.level_of(v) < 0) return false;
    for (int l = 0; l < spec.M; ++l) {
        auto it = masses.find(spec.value(l));
        if (it == masses.end() || it->second < spec.mass(l)) return false;
    }
    return true;
}

bool pairwise_independent(const StepFunction& X1, const StepFunction& X2, const PeriodicIntSet& on)
{
    auto ind = StepFunction::indicator(on);
    std::map<std::pair<Rat, Rat>, BigInt> joint;
    std::map<Rat, BigInt> m1, m2;
    BigInt total(0);
    sweep({&X1, &X2, &ind}, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        if (*v[2] == 0) return;
        const BigInt len(hi - lo);
        joint[{*v[0], *v[1]}] += len;
        m1[*v[0]] += len;
        m2[*v[1]] += len;
        total += len;
    });
    if (total == 0) return true;
    for (const auto& [a, ma] : m1)
        for (const auto& [b, mb] : m2) {
            auto it = joint.find({a, b});
            const BigInt j = it == joint.end() ? BigInt(0) : it->second;
            if (j * total != ma * mb) return false;
        }
    return true;
}

StepFunction trim_super(const StepFunction& X_super, const std::vector<StepFunction>& peers,
                        const M099Spec& spec)
{
    std::vector<const StepFunction*> fs{&X_super};
    for (const auto& p : peers) fs.push_back(&p);
    auto [P, R] = common_grid_of(fs);
    using Key = std::vector<Rat>;
    std::map<Key, std::int64_t> theta;
    std::map<std::pair<int, Key>, std::int64_t> actual;
    auto key_of = [&](const std::vector<const Rat*>& v) {
        Key k;
        for (std::size_t i = 1; i < v.size(); ++i) k.push_back(*v[i]);
        return k;
    };
    sweep(fs, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        Key k = key_of(v);
        theta[k] += hi - lo;
        if (*v[0] == 0) return;
        int l = spec.level_of(*v[0]);
        if (l < 0) throw ContractError("trim_super: value " + to_string(*v[0]) + " is not on the ladder");
        actual[{l, k}] += hi - lo;
    });
    std::map<std::pair<int, Key>, Rat> factor;
    BigInt D(1);
    for (const auto& [k, len] : theta) {
        for (int l = 0; l < spec.M; ++l) {
            const Rat target = spec.mass(l) * Rat(len);
            auto it = actual.find({l, k});
            const std::int64_t have = it == actual.end() ? 0 : it->second;
            if (target == 0) continue;
            if (have == 0) throw ContractError("trim_super: level " + std::to_string(l) + " missing in a peer cell");
            Rat c = target / Rat(have);
            if (c > 1)
                throw ContractError("trim_super: input is not super distributed (level " + std::to_string(l) +
                                    ", factor " + to_string(c) + ")");
            D = lcm(D, BigInt(c.get_den()));
            factor[{l, k}] = c;
        }
    }
    const std::int64_t d = to_int64(D);
    const std::int64_t R2 = checked_mul(R, d);
    std::vector<Run> runs;
    sweep(fs, [&](std::int64_t lo, std::int64_t hi, const std::vector<const Rat*>& v) {
        if (*v[0] == 0) return;
        const int l = spec.level_of(*v[0]);
        const Rat& c = factor.at({l, key_of(v)});
        const std::int64_t a = lo * d, b = hi * d;
        BigInt keep = BigInt(b - a) * c.get_num() / c.get_den();
        const std::int64_t end = a + keep.get_si();
        if (end > a) runs.push_back({a, end, *v[0]});
    });
    return StepFunction::from_runs(P, R2, std::move(runs));
}

DisjointUnionCheck disjoint_union_independence(const StepFunction& X1, const StepFunction& X2,
                                               const PeriodicIntSet& L1, const PeriodicIntSet& L2)
{
    DisjointUnionCheck r;
    const bool disjoint = set_intersect(L1, L2).is_empty();
    auto conditional = [](const StepFunction& X, const PeriodicIntSet& L) {
        auto m = X.masses_on(L);
        const Rat lam = L.measure();
        for (auto& [v, x] : m) x /= lam;
        return m;
    };
    bool same = !L1.is_empty() && !L2.is_empty() && conditional(X1, L1) == conditional(X1, L2) &&
                conditional(X2, L1) == conditional(X2, L2);
    r.premise = disjoint && same && pairwise_independent(X1, X2, L1) && pairwise_independent(X1, X2, L2);
    r.conclusion = pairwise_independent(X1, X2, set_union(L1, L2));
    return r;
}

namespace {

std::uint32_t gf2_poly(int m)
{
    switch (m) {
    case 4: return 0x13;
    case 5: return 0x25;
    case 6: return 0x43;
    case 7: return 0x83;
    case 8: return 0x11B;
    case 9: return 0x211;
    case 10: return 0x409;
    default: throw ConfigError("affine design supports M in [1,7]");
    }
}

}  // namespace

AffineDesign::AffineDesign(const M099Spec& spec, int K, std::uint64_t seed)
    : spec_(spec), layout_(M099Layout::seeded(spec, seed)), K_(K), m_(spec.M + 3), N_(spec.unit_cells()),
      poly_(gf2_poly(spec.M + 3))
{
    const int max_k = std::min(25, 1 << m_);
    if (K < 1 || K > max_k)
        throw ConfigError("affine design needs 1 <= K <= " + std::to_string(max_k));
    for (int k = 0; k < K; ++k) h_.push_back(static_cast<std::int64_t>(k) * 25 + k);   // (k, k)
}

std::int64_t AffineDesign::add(std::int64_t x, std::int64_t y) const
{
    const std::int64_t a = (x / 25) ^ (y / 25);
    const std::int64_t b0 = (x % 5 + y % 5) % 5;
    const std::int64_t b1 = ((x % 25) / 5 + (y % 25) / 5) % 5;
    return a * 25 + b1 * 5 + b0;
}

std::int64_t AffineDesign::mul(std::int64_t x, std::int64_t y) const
{
    std::uint32_t a = static_cast<std::uint32_t>(x / 25), c = static_cast<std::uint32_t>(y / 25), p = 0;
    for (int i = 0; i < m_; ++i) {
        if ((c >> i) & 1) p ^= a << i;
    }
    for (int i = 2 * m_ - 2; i >= m_; --i)
        if ((p >> i) & 1) p ^= poly_ << (i - m_);
    // GF(25) = GF(5)[t]/(t^2 - 2)
    const std::int64_t x0 = x % 5, x1 = (x % 25) / 5, y0 = y % 5, y1 = (y % 25) / 5;
    const std::int64_t b0 = (x0 * y0 + 2 * x1 * y1) % 5;
    const std::int64_t b1 = (x0 * y1 + x1 * y0) % 5;
    return static_cast<std::int64_t>(p) * 25 + b1 * 5 + b0;
}

int AffineDesign::level(int h, std::int64_t cell) const
{
    const std::int64_t u = cell / N_, v = cell % N_;
    return layout_.level_at(add(u, mul(h_[static_cast<std::size_t>(h)], v)));
}

StepFunction AffineDesign::copy(int h) const
{
    std::vector<Run> runs;
    const std::int64_t n = cells();
    int cur = -1;
    for (std::int64_t c = 0; c < n; ++c) {
        const int l = level(h, c);
        if (l == cur && !runs.empty() && runs.back().hi == c) {
            ++runs.back().hi;
            continue;
        }
        cur = l;
        if (l < spec_.M) runs.push_back({c, c + 1, spec_.value(l)});
        else cur = -2;
    }
    return StepFunction::from_runs(1, n, std::move(runs));
}

}  // namespace sqavg
