#include "sqavg/family.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace sqavg {

std::vector<std::uint64_t> PrimePools::all() const
{
    std::vector<std::uint64_t> out = main;
    for (const auto& p : leak) out.insert(out.end(), p.begin(), p.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool PrimePools::disjoint() const
{
    std::size_t total = main.size();
    for (const auto& p : leak) total += p.size();
    return all().size() == total;
}

bool PrimePools::admissible(std::uint64_t n) const
{
    for (auto p : all())
        if (n % p == 0) return false;
    return true;
}

bool PrimePools::admissible(const BigInt& n) const
{
    for (auto p : all())
        if (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p))) return false;
    return true;
}

void FamilyParams::validate() const
{
    if (delta <= 0) throw ConfigError("delta must be positive");
    if (Omega <= 1) throw ConfigError("Omega must exceed 1");
    if (Gamma <= 1) throw ConfigError("Gamma must exceed 1");
    if (A < 1) throw ConfigError("A must be a positive integer");
    if (!pools.disjoint()) throw ConfigError("prime pools overlap");
    for (auto p : pools.all())
        if (!is_prime(p)) throw ConfigError("pool entry " + std::to_string(p) + " is not prime");
}

namespace {

bool avoids(std::uint64_t n, const std::vector<std::uint64_t>& extra)
{
    for (auto e : extra)
        if (e > 1 && n % e == 0) return false;
    return true;
}

bool avoids(const BigInt& n, const std::vector<std::uint64_t>& extra)
{
    for (auto e : extra)
        if (e > 1 && mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(e))) return false;
    return true;
}

}  // namespace

std::uint64_t next_admissible_prime(std::uint64_t from, const PrimePools& pools,
                                    const std::vector<std::uint64_t>& extra)
{
    std::uint64_t p = next_prime(std::max<std::uint64_t>(from, 3));
    while (!pools.admissible(p) || !avoids(p, extra)) p = next_prime(p + 1);
    return p;
}

BigInt next_admissible_prime_above(const BigInt& above, const PrimePools& pools,
                                   const std::vector<std::uint64_t>& extra)
{
    const BigInt cutoff = BigInt(1) << 62;
    if (above < cutoff) {
        std::uint64_t p = next_admissible_prime(static_cast<std::uint64_t>(above.get_ui()) + 1, pools, extra);
        if (above.fits_ulong_p()) return BigInt(static_cast<unsigned long>(p));
    }
    BigInt p;
    mpz_nextprime(p.get_mpz_t(), above.get_mpz_t());
    while (!pools.admissible(p) || !avoids(p, extra)) {
        BigInt q = p;
        mpz_nextprime(p.get_mpz_t(), q.get_mpz_t());
    }
    return p;
}

std::int64_t KMFamily::structural_period() const
{
    std::int64_t P = checked_lcm(lam.period(), lam_period);
    for (const auto& g : f) P = checked_lcm(P, g.period());
    for (const auto& g : X) P = checked_lcm(P, g.period());
    P = checked_lcm(P, E_delta.period());
    P = checked_lcm(P, alpha.period());
    P = checked_lcm(P, omega.period());
    P = checked_lcm(P, tau_x.period());
    return P;
}

bool FamilyReport::pass() const
{
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

bool FamilyReport::pass_except(const std::string& clause) const
{
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const ClauseResult& c) { return c.pass || c.clause == clause; });
}

const ClauseResult* FamilyReport::find(const std::string& clause) const
{
    for (const auto& c : clauses)
        if (c.clause == clause) return &c;
    return nullptr;
}

namespace {

constexpr std::int64_t kCoarseCap = std::int64_t{1} << 22;

std::int64_t cell_on(std::int64_t c, std::int64_t R, std::int64_t res, std::int64_t cells)
{
    const __int128 v = static_cast<__int128>(c) * res / R;
    return static_cast<std::int64_t>(v % cells);
}

const Rat& value_on(const StepFunction& g, std::int64_t c, std::int64_t R)
{
    return g.at_cell(cell_on(c, R, g.resolution(), g.cells()));
}

bool set_on(const PeriodicIntSet& s, std::int64_t c, std::int64_t R)
{
    return s.contains_cell(cell_on(c, R, s.resolution(), s.cells()));
}

// Max of X over each coarse cell of the grid (P, R); P must be a multiple of X's period.
std::vector<Rat> coarse_max(const StepFunction& X, std::int64_t P, std::int64_t R)
{
    const std::int64_t n = P * R;
    std::vector<Rat> out(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    const std::int64_t copies = P / X.period();
    const std::int64_t RX = X.resolution();
    for (std::int64_t t = 0; t < copies; ++t) {
        const __int128 off = static_cast<__int128>(t) * X.cells();
        for (const auto& r : X.runs()) {
            const __int128 lo = (off + r.lo) * R / RX;
            const __int128 hi = ((off + r.hi) * R + RX - 1) / RX;
            for (__int128 c = lo; c < hi && c < n; ++c) {
                auto i = static_cast<std::size_t>(c);
                if (!seen[i] || r.value > out[i]) {
                    out[i] = r.value;
                    seen[i] = 1;
                }
            }
        }
    }
    return out;
}

// f values along x + k^2 for k in [k0, k1), coded as integers over a common denominator.
std::vector<std::int64_t> square_orbit(const IntCoded& f, std::int64_t cell, std::int64_t k0, std::int64_t k1)
{
    std::vector<std::int64_t> s;
    s.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k1 - k0)));
    const std::int64_t P = f.cells / f.res;
    for (std::int64_t k = k0; k < k1; ++k) {
        const std::int64_t km = k % P;
        const std::int64_t sq = static_cast<std::int64_t>(static_cast<__int128>(km) * km % P);
        std::int64_t pos = cell + sq * f.res;
        pos %= f.cells;
        s.push_back(f.num[static_cast<std::size_t>(pos)]);
    }
    return s;
}

std::string fmt_cell(std::int64_t c, std::int64_t R)
{
    return R == 1 ? "x=" + std::to_string(c) : "x=" + std::to_string(c) + "/" + std::to_string(R);
}

Rat ratio(__int128 num, const BigInt& den)
{
    Rat r(BigInt(static_cast<long>(num)), den);
    r.canonicalize();
    return r;
}

ClauseResult named(const char* clause)
{
    ClauseResult c;
    c.clause = clause;
    return c;
}

}  // namespace

FamilyReport verify_family(const KMFamily& fam, const FamilyParams& params, const VerifyOptions& opt)
{
    FamilyReport rep;
    const int K = fam.K();
    const M099Spec spec = M099Spec::make(fam.M);

    // (i) periods
    ClauseResult c1 = named("periods");
    const std::int64_t Ps = fam.structural_period();
    if (fam.tau % BigInt(static_cast<long>(Ps)) != 0) {
        c1.pass = false;
        c1.witness = "structural period " + std::to_string(Ps) + " does not divide tau=" + to_string(fam.tau);
    } else if (fam.tau % BigInt(static_cast<long>(fam.lam_period)) != 0) {
        c1.pass = false;
        c1.witness = "q~=" + std::to_string(fam.lam_period) + " does not divide tau";
    }
    if (static_cast<int>(fam.X.size()) != K) {
        c1.pass = false;
        c1.witness = "f and X counts differ";
    }
    for (const auto& g : fam.f)
        for (const auto& r : g.runs())
            if (r.value < 0) {
                c1.pass = false;
                c1.witness = "negative f value";
            }
    c1.checked = 1;
    rep.clauses.push_back(c1);

    // coarse grid: everything except X
    std::vector<const StepFunction*> fs;
    for (const auto& g : fam.f) fs.push_back(&g);
    fs.push_back(&fam.alpha);
    fs.push_back(&fam.omega);
    fs.push_back(&fam.tau_x);
    auto [P, R] = common_grid_of(fs);
    P = checked_lcm(P, fam.E_delta.period());
    R = checked_lcm(R, fam.E_delta.resolution());
    P = checked_lcm(P, fam.lam.period());
    R = checked_lcm(R, fam.lam.resolution());
    for (const auto& x : fam.X) P = checked_lcm(P, x.period());
    if (checked_mul(P, R) > kCoarseCap) throw ScaleError("verify_family: coarse grid above cap");
    const std::int64_t cells = P * R;

    std::vector<std::vector<Rat>> xmax;
    for (const auto& x : fam.X) xmax.push_back(coarse_max(x, P, R));
    std::vector<IntCoded> coded;
    for (const auto& g : fam.f) coded.push_back(int_coded(g));

    ClauseResult c2 = named("windows");
    ClauseResult cdom = named("domination");
    ClauseResult c4 = named("window-periodicity");
    std::set<BigInt> tau_values;
    const Rat A(static_cast<long>(params.A));

    for (std::int64_t c = 0; c < cells; ++c) {
        if (set_on(fam.E_delta, c, R)) continue;
        const Rat& a = value_on(fam.alpha, c, R);
        const Rat& w = value_on(fam.omega, c, R);
        const Rat& t = value_on(fam.tau_x, c, R);
        ++c2.checked;
        std::string bad;
        if (a.get_den() != 1 || w.get_den() != 1 || t.get_den() != 1) bad = "non-integer window data";
        else if (a <= 0 || w <= 0 || t <= 0) bad = "window data undefined off E";
        else if (!(w > a && a > A)) bad = "omega > alpha > A fails";
        else if (!(t.get_num() < fam.tau)) bad = "tau(x) >= tau";
        else if (!(w.get_num() * w.get_num() < fam.tau)) bad = "omega^2 >= tau";
        else if (!(w > params.Omega * t * a)) bad = "omega/alpha <= Omega tau(x)";
        if (!bad.empty()) {
            if (c2.pass) c2.witness = fmt_cell(c, R) + ": " + bad;
            c2.pass = false;
            continue;
        }
        tau_values.insert(t.get_num());
        const BigInt& tx = t.get_num();
        const bool in_lam = set_on(fam.lam, c, R);

        for (int h = 0; h < K; ++h) {
            const StepFunction& fh = fam.f[static_cast<std::size_t>(h)];
            const IntCoded& ch = coded[static_cast<std::size_t>(h)];
            const Rat& xm = xmax[static_cast<std::size_t>(h)][static_cast<std::size_t>(c)];
            const std::int64_t fcell = cell_on(c, R, fh.resolution(), fh.cells());
            const bool reducible = tx % BigInt(static_cast<long>(fh.period())) == 0;

            // (iv) window periodicity on Lambda
            if (in_lam) {
                ++c4.checked;
                if (!reducible) {
                    // explicit comparison over the window, cell by cell
                    if (!fits_int64(w.get_num()) || !fits_int64(tx)) {
                        if (c4.pass) c4.witness = fmt_cell(c, R) + ": window too large to scan";
                        c4.pass = false;
                    } else {
                        const std::int64_t a2 = to_int64(a.get_num() * a.get_num());
                        const std::int64_t w2 = to_int64(w.get_num() * w.get_num());
                        const std::int64_t t64 = to_int64(tx);
                        const std::int64_t span = (w2 - t64 - a2) * fh.resolution();
                        if (span > opt.pair_budget) {
                            if (c4.pass) c4.witness = fmt_cell(c, R) + ": window above scan budget";
                            c4.pass = false;
                        } else {
                            for (std::int64_t j = 0; j < span; ++j) {
                                const std::int64_t p0 = mod_floor(fcell + a2 * fh.resolution() + j, fh.cells());
                                const std::int64_t p1 = mod_floor(p0 + t64 * fh.resolution(), fh.cells());
                                if (ch.num[static_cast<std::size_t>(p0)] != ch.num[static_cast<std::size_t>(p1)]) {
                                    if (c4.pass)
                                        c4.witness = fmt_cell(c, R) + ", h=" + std::to_string(h + 1) +
                                                     ": f(x+j+tau(x)) != f(x+j)";
                                    c4.pass = false;
                                    break;
                                }
                            }
                        }
                    }
                }
            }

            // domination
            ++cdom.checked;
            Rat avg_min;
            bool any = false;
            if (reducible) {
                // the orbit k -> f(x+k^2) has period dividing period(f) | tau(x), so every
                // admissible (n, m) gives the same average
                if (w.get_num() - a.get_num() >= tx) {
                    const auto s = square_orbit(ch, fcell, 0, fh.period());
                    __int128 sum = 0;
                    for (auto v : s) sum += v;
                    avg_min = ratio(sum, ch.den * fh.period());
                    any = true;
                }
            } else {
                const std::int64_t a64 = to_int64(a.get_num());
                const std::int64_t w64 = to_int64(w.get_num());
                const std::int64_t t64 = to_int64(tx);
                const auto s = square_orbit(ch, fcell, a64, w64);
                std::vector<__int128> pre(s.size() + 1, 0);
                for (std::size_t i = 0; i < s.size(); ++i) pre[i + 1] = pre[i] + s[i];
                __int128 best_s = 0;
                std::int64_t best_m = 0;
                auto consider = [&](std::int64_t n, std::int64_t m) {
                    const __int128 sm = pre[static_cast<std::size_t>(n - a64 + m)] - pre[static_cast<std::size_t>(n - a64)];
                    if (best_m == 0 || sm * best_m < best_s * m) {
                        best_s = sm;
                        best_m = m;
                    }
                };
                const std::int64_t L = w64 - a64;
                __int128 pairs = 0;
                for (std::int64_t m = t64; m <= L; m += t64) pairs += L - m + 1;
                if (opt.exhaustive && pairs <= opt.pair_budget) {
                    for (std::int64_t m = t64; m <= L; m += t64)
                        for (std::int64_t n = a64; n + m <= w64; ++n) consider(n, m);
                } else if (L >= t64) {
                    std::mt19937_64 rng(opt.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(c + 1)));
                    const std::int64_t jmax = L / t64;
                    for (std::int64_t i = 0; i < opt.samples; ++i) {
                        const std::int64_t m = t64 * (1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(jmax)));
                        const std::int64_t n = a64 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(L - m + 1));
                        consider(n, m);
                    }
                }
                if (best_m > 0) {
                    avg_min = ratio(best_s, ch.den * best_m);
                    any = true;
                }
            }
            if (!any) continue;
            if (avg_min > xm) continue;
            if (xm == 0 && avg_min == 0) {
                ++rep.zero_ties;
                continue;
            }
            if (cdom.pass)
                cdom.witness = fmt_cell(c, R) + ", h=" + std::to_string(h + 1) + ": min average " +
                               to_string(avg_min) + " <= X=" + to_string(xm);
            cdom.pass = false;
        }
    }
    cdom.note = "ties at X=0 counted separately";

    const Rat mE = fam.E_delta.measure();
    if (!(mE < params.delta)) {
        c2.pass = false;
        c2.witness = "measure(E)=" + to_string(mE) + " >= delta";
    }
    rep.clauses.push_back(c2);
    rep.clauses.push_back(cdom);

    // (iii)
    ClauseResult c3 = named("coprimality");
    for (auto p : params.pools.all()) {
        ++c3.checked;
        const BigInt bp(static_cast<unsigned long>(p));
        if (fam.tau % bp == 0) {
            c3.pass = false;
            c3.witness = "tau divisible by pool prime " + std::to_string(p);
            break;
        }
        for (const auto& t : tau_values)
            if (t % bp == 0) {
                c3.pass = false;
                c3.witness = "tau(x)=" + to_string(t) + " divisible by pool prime " + std::to_string(p);
                break;
            }
        if (!c3.pass) break;
    }
    rep.clauses.push_back(c3);
    rep.clauses.push_back(c4);

    // (v)
    ClauseResult c5 = named("integral");
    const Rat bound = params.Gamma * fam.gamma_prime * pow2(-fam.M + 1);
    for (int h = 0; h < K; ++h) {
        ++c5.checked;
        const Rat mean = fam.f[static_cast<std::size_t>(h)].mean();
        if (!(mean < bound)) {
            c5.pass = false;
            c5.witness = "h=" + std::to_string(h + 1) + ": mean " + to_string(mean) + " >= " + to_string(bound);
            break;
        }
    }
    rep.clauses.push_back(c5);

    // (vi)
    ClauseResult c6 = named("distribution");
    for (int h = 0; h < K && c6.pass; ++h) {
        ++c6.checked;
        if (!is_m099_on(fam.X[static_cast<std::size_t>(h)], spec, fam.lam)) {
            c6.pass = false;
            c6.witness = "X_" + std::to_string(h + 1) + " not conditionally M-0.99 distributed on Lambda";
        }
    }
    for (int h = 0; h < K && c6.pass; ++h)
        for (int g = h + 1; g < K && c6.pass; ++g) {
            ++c6.checked;
            if (!pairwise_independent(fam.X[static_cast<std::size_t>(h)], fam.X[static_cast<std::size_t>(g)], fam.lam)) {
                c6.pass = false;
                c6.witness = "X_" + std::to_string(h + 1) + ", X_" + std::to_string(g + 1) + " not independent on Lambda";
            }
        }
    rep.clauses.push_back(c6);
    return rep;
}

WindowRecipe window_recipe(const FamilyParams& params, const std::vector<std::uint64_t>& extra)
{
    WindowRecipe w;
    w.alpha = params.A + 1;
    w.tau_x = static_cast<std::int64_t>(next_admissible_prime(3, params.pools, extra));
    w.omega = ceil_of(Rat(static_cast<long>(w.tau_x)) * params.Omega * Rat(static_cast<long>(params.A + 2)));
    w.tau = next_admissible_prime_above(w.omega * w.omega, params.pools, extra);
    return w;
}

namespace {

KMFamily recipe_family(const FamilyParams& params, int M, int K, const std::vector<std::uint64_t>& extra)
{
    params.validate();
    if (K < 1) throw ConfigError("K must be positive");
    M099Spec::make(M);
    const WindowRecipe w = window_recipe(params, extra);
    KMFamily fam;
    fam.M = M;
    fam.tau = w.tau;
    fam.f.assign(static_cast<std::size_t>(K), StepFunction::constant(Rat(1)));
    fam.alpha = StepFunction::constant(Rat(static_cast<long>(w.alpha)));
    fam.omega = StepFunction::constant(Rat(w.omega));
    fam.tau_x = StepFunction::constant(Rat(static_cast<long>(w.tau_x)));
    return fam;
}

}  // namespace

KMFamily make_constant_family(const FamilyParams& params, int M, int K, const Rat& value)
{
    KMFamily fam = recipe_family(params, M, K, {});
    fam.X.assign(static_cast<std::size_t>(K), StepFunction::constant(value));
    return fam;
}

KMFamily make_base_family(const FamilyParams& params, int M, int K, std::uint64_t seed,
                          const std::vector<std::uint64_t>& extra)
{
    KMFamily fam = recipe_family(params, M, K, extra);
    fam.X = make_m099_product(M099Spec::make(M), PeriodicIntSet::full_set(), K, seed);
    return fam;
}

KMFamily lift_to_residue_class(const KMFamily& fam, const SquareFreeModulus& qt, const GammaParam& g,
                               const PrimePools& pools)
{
    if (fam.lam_period != 1 || !fam.lam.is_full())
        throw ContractError("lift_to_residue_class expects a family living on R");
    const std::int64_t q = qt.q64();
    for (auto p : pools.all())
        if (q % static_cast<std::int64_t>(p) == 0)
            throw ContractError("q~ shares the pool prime " + std::to_string(p));
    if (gcd(fam.tau, qt.q()) != 1) throw ContractError("tau is not coprime to q~");
    for (const auto& r : fam.tau_x.runs())
        if (r.value != 0 && gcd(r.value.get_num(), qt.q()) != 1)
            throw ContractError("tau(x)=" + to_string(r.value) + " is not coprime to q~");

    const PeriodicIntSet lam = build_lambda_bar(qt, g, true);
    const PeriodicIntSet xi = build_xi(qt, g);
    Rat scale(qt.q(), BigInt(1) << qt.kappa());
    scale.canonicalize();

    KMFamily out;
    out.M = fam.M;
    out.tau = fam.tau * qt.q();
    out.lam = lam;
    out.lam_period = q;
    out.gamma_prime = g.gamma;
    for (const auto& f : fam.f) out.f.push_back(f.scaled(scale).restricted(xi));
    for (const auto& x : fam.X) out.X.push_back(x.restricted(lam));
    out.E_delta = fam.E_delta;
    out.alpha = fam.alpha;
    out.omega = fam.omega;
    out.tau_x = fam.tau_x.scaled(Rat(qt.q()));

    // conditional law of X-bar on Lambda-bar' equals the law of X on R
    const Rat mlam = lam.measure();
    for (std::size_t h = 0; h < fam.X.size(); ++h) {
        const auto base = fam.X[h].masses_on(PeriodicIntSet::full_set());
        const auto cond = out.X[h].masses_on(lam);
        for (const auto& [v, m] : base) {
            auto it = cond.find(v);
            const Rat got = it == cond.end() ? Rat(0) : it->second;
            if (got != m * mlam)
                throw ContractError("lifted X_" + std::to_string(h + 1) + " has conditional mass " + to_string(got) +
                                    " at value " + to_string(v) + ", expected " + to_string(m * mlam));
        }
    }
    return out;
}

KMFamily lifted_family(const FamilyParams& params, int M, int K, const SquareFreeModulus& qt,
                       const GammaParam& g, std::uint64_t seed)
{
    FamilyParams inner = params;
    inner.Omega = params.Omega * Rat(qt.q());
    const KMFamily base = make_base_family(inner, M, K, seed, qt.primes());
    return lift_to_residue_class(base, qt, g, params.pools);
}

TransportReport lift_transport_check(const KMFamily& base, const KMFamily& lifted, const SquareFreeModulus& qt)
{
    TransportReport rep;
    const std::int64_t q = qt.q64();
    std::vector<const StepFunction*> fs;
    for (const auto& g : base.f) fs.push_back(&g);
    for (const auto& g : lifted.f) fs.push_back(&g);
    fs.push_back(&base.alpha);
    fs.push_back(&base.omega);
    fs.push_back(&base.tau_x);
    auto [P, R] = common_grid_of(fs);
    P = checked_lcm(P, lifted.lam.period());
    P = checked_lcm(P, lifted.E_delta.period());
    R = checked_lcm(R, lifted.E_delta.resolution());
    R = checked_lcm(R, lifted.lam.resolution());
    if (checked_mul(P, R) > kCoarseCap) throw ScaleError("transport check grid above cap");

    bool first = true;
    for (std::size_t h = 0; h < base.f.size(); ++h) {
        const IntCoded cb = int_coded(base.f[h]);
        const IntCoded cl = int_coded(lifted.f[h]);
        for (std::int64_t c = 0; c < P * R; ++c) {
            if (!set_on(lifted.lam, c, R) || set_on(lifted.E_delta, c, R)) continue;
            const std::int64_t a = to_int64(value_on(base.alpha, c, R).get_num());
            const std::int64_t w = to_int64(value_on(base.omega, c, R).get_num());
            const std::int64_t t = to_int64(value_on(base.tau_x, c, R).get_num());
            const std::int64_t m = t * q;
            if (w - a < m) continue;
            const auto sb = square_orbit(cb, cell_on(c, R, cb.res, cb.cells), a, w);
            const auto sl = square_orbit(cl, cell_on(c, R, cl.res, cl.cells), a, w);
            std::vector<__int128> pb(sb.size() + 1, 0), pl(sl.size() + 1, 0);
            for (std::size_t i = 0; i < sb.size(); ++i) {
                pb[i + 1] = pb[i] + sb[i];
                pl[i + 1] = pl[i] + sl[i];
            }
            const BigInt Db = cb.den, Dl = cl.den;
            for (std::int64_t n = a; n + m <= w; ++n) {
                ++rep.checked;
                const auto i = static_cast<std::size_t>(n - a);
                const __int128 Sl = pl[i + static_cast<std::size_t>(m)] - pl[i];
                const __int128 Sb = pb[i + static_cast<std::size_t>(t)] - pb[i];
                const Rat margin = ratio(Sl, Dl * m) - ratio(Sb, Db * t);
                if (first || margin < rep.min_margin) {
                    rep.min_margin = margin;
                    first = false;
                }
                if (margin < 0) ++rep.failed;
            }
        }
    }
    return rep;
}

}  // namespace sqavg
