#include "sqavg/leakage.hpp"

#include "sqavg/residue_stats.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace sqavg {

bool LeakageLevel::identities_pass() const
{
    return std::all_of(identities.begin(), identities.end(), [](const IdentityCheck& c) { return c.pass; });
}

Rat LeakageState::x_value(int l) const
{
    return (1 - cfg.rho_prime) * C_tilde * F_measures.at(static_cast<std::size_t>(l));
}

int LeakageState::L_prime() const
{
    const Rat base = 1 - g.gamma / 2;
    const Rat target = pow2(-M);
    Rat p = 1;
    int L = 0;
    while (!(p < target)) {
        p *= base;
        ++L;
    }
    return L;
}

namespace {

BigInt big_of(std::uint64_t v) { return BigInt(static_cast<unsigned long>(v)); }

PeriodicIntSet dilate_units(const PeriodicIntSet& s, const BigInt& d)
{
    if (s.is_empty() || s.is_full()) return s;
    if (d >= s.period()) return PeriodicIntSet::full_set();
    const std::int64_t c = d.get_si() * s.resolution();
    return s.dilate_cells(c, c);
}

bool is_prime_big(const BigInt& n) { return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0; }

BoundCheck bound_lt(const std::string& name, const Rat& lhs, const Rat& rhs, const std::string& detail = {})
{
    BoundCheck b;
    b.name = name;
    b.margin = rhs - lhs;
    b.holds = lhs < rhs;
    b.detail = detail.empty() ? to_string(lhs) + " < " + to_string(rhs) : detail;
    return b;
}

BoundCheck bound_between(const std::string& name, const Rat& lo, const Rat& v, const Rat& hi, bool hi_inclusive = false)
{
    BoundCheck b;
    b.name = name;
    b.margin = std::min(v - lo, hi - v);
    b.holds = lo < v && (hi_inclusive ? v <= hi : v < hi);
    b.detail = to_string(lo) + " < " + to_string(v) + (hi_inclusive ? " <= " : " < ") + to_string(hi);
    return b;
}

IdentityCheck identity(const std::string& name, bool pass, const std::string& detail)
{
    return IdentityCheck{name, pass, detail};
}

IdentityCheck subset_identity(const std::string& name, const LazySet& a, const LazySet& b)
{
    const Tri t = a.subset_of(b);
    return identity(name, t == Tri::Yes, std::string("subset: ") + to_string(t));
}

// f on [0, cut) repeated with its own period, `tail` on [cut, P); period P.
StepFunction cut_function(const StepFunction& f, std::int64_t cut, std::int64_t P, const StepFunction* tail)
{
    std::int64_t R = f.resolution();
    if (tail) R = checked_lcm(R, tail->resolution());
    const StepFunction fr = f.rebased(f.period(), R);
    std::vector<Run> runs;
    auto emit = [&](const StepFunction& g, std::int64_t lo, std::int64_t hi) {
        const std::int64_t C = g.cells();
        for (std::int64_t base = lo - mod_floor(lo, C); base < hi; base += C)
            for (const auto& r : g.runs()) {
                const std::int64_t a = std::max(lo, base + r.lo), b = std::min(hi, base + r.hi);
                if (a < b && r.value != 0) runs.push_back({a, b, r.value});
            }
        if (static_cast<std::int64_t>(runs.size()) > (std::int64_t{1} << 27))
            throw ScaleError("cut_function: run count above cap");
    };
    emit(fr, 0, cut * R);
    if (tail) emit(tail->rebased(tail->period(), R), cut * R, P * R);
    return StepFunction::from_runs(P, R, std::move(runs));
}

}  // namespace

LeakageState leakage_init(const FamilyParams& params, int M, int K, const GammaParam& g, const LeakageConfig& cfg)
{
    params.validate();
    M099Spec::make(M);
    if (K < 0) throw ConfigError("K must be nonnegative");
    LeakageState s;
    s.M = M;
    s.K = K;
    s.g = g;
    s.params = params;
    s.cfg = cfg;
    s.C_tilde = c_tilde_gamma(g);
    if (!((1 - cfg.rho_prime) * s.C_tilde < 1)) throw ConfigError("(1 - rho') C~ must be below 1");
    if (K > 0) {
        if (!(g.gamma < Rat(1, 7))) throw ConfigError("K > 0 needs gamma < 1/7 so that C_gamma is defined");
        const Rat C = c_gamma(g);
        if (!(params.Gamma / C > 1)) throw ConfigError("Gamma / C_gamma must exceed 1");
        s.Gamma0 = params.Gamma / (2 * C) + Rat(1, 2);
        s.family0 = make_base_family(params, M, K, cfg.seed);
        s.f = s.family0.f;
        s.X = s.family0.X;
    }
    s.base = window_recipe(params);
    s.tau = s.base.tau;
    s.F = LazySet::full();
    s.F_measures = {Rat(1)};
    s.r = {Rat(1)};
    s.S = {LazySet::full()};
    s.E = LazySet::empty();
    s.pools = params.pools;
    return s;
}

BigInt choose_tau_prime(const LeakageState& s, const BigInt& floor, const SquareFreeModulus& q)
{
    BigInt lower = s.tau * s.cfg.tau_floor_factor;
    if (floor > lower) lower = floor;
    return next_admissible_prime_above(lower - 1, s.pools, q.primes());
}

LeakageState leakage_step(const LeakageState& s, const BigInt& tau_prime, const SquareFreeModulus& q)
{
    const int L = s.L + 1;
    if (!is_prime_big(tau_prime)) throw ConfigError("tau' must be prime");
    if (!(tau_prime > s.tau)) throw ConfigError("tau' must exceed tau_{L-1}");
    if (gcd(tau_prime, q.q()) != 1) throw ConfigError("tau' must be coprime to q_L");
    if (q.kappa() < s.g.c) throw ConfigError("kappa_L must be at least c_gamma");
    for (auto p : q.primes())
        if (!s.pools.admissible(p)) throw ConfigError("prime " + std::to_string(p) + " of q_L is already in a pool");
    if (!s.pools.admissible(tau_prime)) throw ConfigError("tau' is already in a pool");

    LeakageLevel lev;
    lev.L = L;
    lev.tau_prev = s.tau;
    lev.tau_prime = tau_prime;
    lev.q = q;
    lev.k = tau_prime / s.tau;
    if (lev.k < 2) throw ConfigError("tau' must be at least 2 tau_{L-1}");
    const BigInt cut = lev.k * s.tau;
    const BigInt cut_E = (lev.k - 1) * s.tau;
    const std::int64_t qq = q.q64();

    // (a) rearrangement
    lev.F_prime_prev = LazySet::truncated(s.F, cut, tau_prime);
    for (int l = 0; l < L - 1; ++l)
        lev.S_prime_prev.push_back(LazySet::truncated(s.S[static_cast<std::size_t>(l)], cut, tau_prime));
    lev.S_prime_prev.push_back(LazySet::full());
    lev.E_prime_prev = LazySet::tail_filled(s.E, cut_E, tau_prime);

    // (b) auxiliary sets
    lev.lam_bar_prime = build_lambda_bar(q, s.g, true);
    if (lev.lam_bar_prime.is_full()) throw ScaleError("Lambda-bar'(q_L) covers the line");
    lev.xi = build_xi(q, s.g);
    const PeriodicIntSet outside = lev.lam_bar_prime.complement();
    lev.phi_tilde = dilate_units(set_union(lev.lam_bar_prime, lev.xi), 2 * tau_prime).complement();
    lev.phi_hat = dilate_units(lev.lam_bar_prime, tau_prime).complement();
    lev.psi_hat = dilate_units(outside, tau_prime);
    lev.psi_tilde = dilate_units(outside, 2 * tau_prime);
    lev.phi = LazySet::blocks_meeting(tau_prime, qq, lev.phi_tilde);
    lev.psi = LazySet::blocks_meeting(tau_prime, qq, lev.psi_hat);
    lev.phi_empty = lev.phi.is_empty_node();

    const LazySet lam = LazySet::leaf(lev.lam_bar_prime);
    const LazySet out_set = LazySet::leaf(outside);

    // (c) new support
    LeakageState t = s;
    t.L = L;
    t.F = lev.psi & lev.F_prime_prev;

    // (d) S chain
    t.S.clear();
    if (L == 1) {
        t.S = {out_set, LazySet::full()};
    } else {
        for (int l = 0; l <= L - 2; ++l) t.S.push_back(lev.phi & lev.S_prime_prev[static_cast<std::size_t>(l)]);
        t.S.push_back(out_set);
        t.S.push_back(LazySet::full());
    }

    // (f) exceptional set
    lev.E1 = lev.psi & lev.E_prime_prev;
    lev.E2 = LazySet::leaf(set_union(lev.lam_bar_prime, lev.phi_tilde).complement());
    lev.E2_tilde = ~(lam | lev.phi);
    const Deficiency def = translate_deficiency(q, s.g, s.cfg.rho_tilde, true);
    lev.E3 = LazySet::leaf(PeriodicIntSet::from_members(qq, def.bad));
    lev.E_delta = LazySet::empty();

    // K > 0: family lifted onto Lambda-bar'(q_L)
    if (s.K > 0) {
        FamilyParams ip = s.params;
        ip.Omega = s.params.Omega * Rat(tau_prime);
        ip.Gamma = s.Gamma0;
        ip.pools = s.pools;
        ip.pools.main.push_back(tau_prime.get_ui());
        KMFamily inner = lifted_family(ip, s.M, s.K, q, s.g, s.cfg.seed + static_cast<std::uint64_t>(L));
        lev.tau_bar = inner.tau;
        if (!inner.E_delta.is_empty()) lev.E_delta = LazySet::leaf(inner.E_delta);

        if (!fits_int64(tau_prime) || !fits_int64(cut)) throw ScaleError("K > 0 step needs tau' below 2^63");
        auto phi_set = lev.phi.materialize();
        auto et_set = lev.E2_tilde.materialize();
        if (!phi_set || !et_set) throw ScaleError("K > 0 step: Phi_L or E~''_L above the materialize cap");
        const auto layout = make_m099_product(M099Spec::make(s.M), PeriodicIntSet::full_set(), s.K, s.cfg.seed);
        const std::int64_t tp = tau_prime.get_si(), c64 = cut.get_si();
        t.f.clear();
        t.X.clear();
        for (int h = 0; h < s.K; ++h) {
            const auto hs = static_cast<std::size_t>(h);
            const StepFunction fp = cut_function(s.f[hs], c64, tp, nullptr);
            t.f.push_back(fp.restricted(*phi_set) + inner.f[hs]);
            const StepFunction xp = cut_function(s.X[hs], c64, tp, &layout[hs]);
            t.X.push_back(xp.restricted(*phi_set) + layout[hs].restricted(*et_set) + inner.X[hs]);
        }
        lev.inner = std::move(inner);
    } else {
        BigInt e;
        mpz_pow_ui(e.get_mpz_t(), tau_prime.get_mpz_t(), static_cast<unsigned long>(s.cfg.tau_bar_exponent));
        lev.tau_bar = q.q() * e;
    }
    lev.tau = q.q() * lev.tau_bar * tau_prime;
    t.tau = lev.tau;
    t.E = lev.E_delta | lev.E1 | lev.E2 | lev.E3;
    lev.m_E = t.E.measure();

    // measures
    const MeasureBound mF = t.F.measure_counted();
    const MeasureBound mpsi = lev.psi.measure();
    const MeasureBound mphi = lev.phi.measure();
    const MeasureBound mFp = lev.F_prime_prev.measure();
    lev.m_lam_bar_prime = lev.lam_bar_prime.measure();
    lev.m_phi = mphi.lo;
    lev.m_psi = mpsi.lo;
    lev.m_F_prime_prev = mFp.lo;
    lev.m_F = mF.lo;
    const Rat& mprev = s.F_measures.back();
    lev.r = lev.m_F / mprev;
    t.F_measures.push_back(lev.m_F);
    t.r.push_back(lev.r);
    for (const auto& S : t.S) lev.m_S.push_back(S.measure_counted().lo);

    // (g) exact identities
    const bool exact = mF.exact && mpsi.exact && mFp.exact;
    lev.identities.push_back(identity("r_L ratio", exact && lev.m_F == mpsi.lo * mFp.lo && lev.r == mpsi.lo * mFp.lo / mprev,
                                      "r_L=" + to_string(lev.r) + " lambda(Psi)=" + to_string(mpsi.lo) +
                                          " lambda(F'_{L-1})=" + to_string(mFp.lo) + (exact ? "" : " (not exact)")));
    Rat prod = 1;
    for (const auto& r : t.r) prod *= r;
    lev.identities.push_back(identity("lambda(F_L) = prod r_l", exact && prod == lev.m_F,
                                      to_string(lev.m_F) + " vs " + to_string(prod)));

    {
        bool ok = true;
        std::string detail;
        for (std::size_t l = 0; l + 1 < t.S.size(); ++l) {
            const Tri tr = t.S[l].subset_of(t.S[l + 1]);
            if (tr != Tri::Yes) {
                ok = false;
                detail = "S_{L," + std::to_string(l) + "} subset S_{L," + std::to_string(l + 1) + "}: " + to_string(tr);
                break;
            }
        }
        if (!t.S.back().is_full_node()) {
            ok = false;
            detail = "S_{L,L} is not the full line";
        }
        lev.identities.push_back(identity("S nesting", ok, ok ? "S_{L,0} ... S_{L,L} nested" : detail));
    }
    {
        bool ok = true;
        std::string detail;
        for (int l = 0; l <= L - 2 && ok; ++l) {
            const auto ls = static_cast<std::size_t>(l);
            const MeasureBound a = t.S[ls].measure_counted();
            const MeasureBound b = lev.S_prime_prev[ls].measure();
            if (!(a.exact && b.exact && mphi.exact && a.lo == mphi.lo * b.lo)) {
                ok = false;
                detail = "lambda(S_{L," + std::to_string(l) + "})=" + to_string(a.lo) + " vs lambda(Phi) lambda(S')=" +
                         to_string(mphi.lo * b.lo);
            }
        }
        const MeasureBound et = lev.E2_tilde.measure_counted();
        const Rat top = lev.m_S[static_cast<std::size_t>(L - 1)];
        if (ok && !(et.exact && top == mphi.lo + et.lo && top == 1 - lev.m_lam_bar_prime)) {
            ok = false;
            detail = "lambda(S_{L,L-1})=" + to_string(top) + " vs lambda(Phi)+lambda(E~'')=" + to_string(mphi.lo + et.lo);
        }
        lev.identities.push_back(identity("S measure products", ok, ok ? "all exact" : detail));
    }
    {
        // support identity at sampled points, with Psi decided from Psi-hat directly
        std::mt19937_64 rng(s.cfg.seed ^ (0x51ed27u + static_cast<std::uint64_t>(L)));
        const BigInt P = t.F.period();
        bool ok = true;
        std::string detail;
        for (std::int64_t i = 0; i < s.cfg.identity_samples && ok; ++i) {
            BigInt x = (big_of(rng()) << 64) + big_of(rng());
            x %= P;
            const BigInt j = x / tau_prime;
            bool in_psi;
            if (tau_prime >= qq) {
                in_psi = !lev.psi_hat.is_empty();
            } else {
                const std::int64_t st = BigInt((j * tau_prime) % qq).get_si();
                const std::int64_t w = tau_prime.get_si();
                const std::int64_t e1 = std::min(qq, st + w);
                in_psi = lev.psi_hat.cell_count_in(st, e1) > 0 ||
                         (st + w > qq && lev.psi_hat.cell_count_in(0, st + w - qq) > 0);
            }
            const BigInt r = x % tau_prime;
            const bool expect = in_psi && r < cut && s.F.contains(r);
            if (t.F.contains(x) != expect) {
                ok = false;
                detail = "x=" + to_string(x);
            }
        }
        lev.identities.push_back(identity("F_L = Psi_L cap F'_{L-1}", ok,
                                          ok ? std::to_string(s.cfg.identity_samples) + " sampled points" : detail));
    }
    lev.identities.push_back(subset_identity("Phi_L cap Xi = empty", lev.phi, LazySet::leaf(lev.xi.complement())));
    {
        const LazySet chain[] = {LazySet::leaf(lev.phi_tilde), lev.phi,      LazySet::leaf(lev.phi_hat), out_set,
                                 LazySet::leaf(lev.psi_hat),   lev.psi,      LazySet::leaf(lev.psi_tilde)};
        const char* names[] = {"Phi~", "Phi", "Phi^", "R\\Lambda'", "Psi^", "Psi", "Psi~"};
        bool ok = true;
        std::string detail = "Phi~ < Phi < Phi^ < R\\Lambda' < Psi^ < Psi < Psi~";
        for (int i = 0; i + 1 < 7 && ok; ++i) {
            const Tri tr = chain[i].subset_of(chain[i + 1]);
            if (tr != Tri::Yes) {
                ok = false;
                detail = std::string(names[i]) + " subset " + names[i + 1] + ": " + to_string(tr);
            }
        }
        lev.identities.push_back(identity("sandwich", ok, detail));
    }
    lev.lam_in_psi = lam.subset_of(lev.psi);

    // reported large-scale bounds
    const Rat gam = s.g.gamma;
    const Rat dq = s.params.delta / (4 * s.L_prime());
    lev.bounds.push_back(bound_between("r_L window", 1 - 2 * gam, lev.r, 1 - gam / 2));
    lev.bounds.push_back(bound_between("F' ratio", 1 - s.cfg.rho, lev.m_F_prime_prev / mprev, Rat(1), true));
    lev.bounds.push_back(bound_lt("Phi mass", (1 - lev.m_lam_bar_prime) / 2, lev.m_phi,
                                  "lambda(Phi)=" + to_string(lev.m_phi) + " > lambda(R\\Lambda')/2=" +
                                      to_string((1 - lev.m_lam_bar_prime) / 2)));
    lev.bounds.back().holds = lev.m_phi > (1 - lev.m_lam_bar_prime) / 2;
    lev.bounds.back().margin = lev.m_phi - (1 - lev.m_lam_bar_prime) / 2;
    lev.bounds.push_back(bound_lt("E'' mass", lev.E2.measure().lo, dq));
    lev.bounds.push_back(bound_lt("E''' mass", lev.E3.measure().lo, dq));
    {
        const Rat base = 1 - lev.m_lam_bar_prime;
        const Rat tol = s.cfg.approx_tolerance;
        for (const auto& [name, m] : {std::pair<std::string, Rat>{"Psi approx", lev.m_psi}, {"Phi approx", lev.m_phi}}) {
            Rat dev = m / base - 1;
            if (dev < 0) dev = -dev;
            BoundCheck b;
            b.name = name;
            b.holds = dev <= tol;
            b.margin = tol - dev;
            b.detail = "|lambda/lambda(R\\Lambda') - 1| = " + to_string(dev);
            lev.bounds.push_back(b);
        }
    }
    {
        const Rat s0 = lev.m_S[0];
        const Rat rho = s.cfg.rho;
        for (int l = 0; l <= L; ++l) {
            const Rat v = t.F_measures[static_cast<std::size_t>(l)] * lev.m_S[static_cast<std::size_t>(l)];
            BoundCheck b = bound_between("S chain l=" + std::to_string(l), (1 - rho) * s0, v, s0 / (1 - rho));
            lev.bounds.push_back(b);
        }
    }
    lev.bounds.push_back(bound_lt("E measure", lev.m_E.hi, s.params.delta));

    // pools
    if (t.pools.leak.size() < static_cast<std::size_t>(L + 1)) t.pools.leak.resize(static_cast<std::size_t>(L + 1));
    t.pools.leak[static_cast<std::size_t>(L - 1)].push_back(tau_prime.get_ui());
    for (auto p : q.primes()) t.pools.leak[static_cast<std::size_t>(L)].push_back(p);
    if (!fits_int64(tau_prime)) t.pools.leak[static_cast<std::size_t>(L - 1)].pop_back();

    t.levels.push_back(std::move(lev));
    return t;
}

LeakageRun leakage_run(const FamilyParams& params, int M, int K, const GammaParam& g, const LeakageConfig& cfg,
                       const std::vector<ScheduleStep>& schedule)
{
    LeakageRun run;
    run.states.push_back(leakage_init(params, M, K, g, cfg));
    const Rat target = pow2(-M);
    const int Lp = run.states.back().L_prime();
    for (const auto& step : schedule) {
        const LeakageState& cur = run.states.back();
        if (cur.L >= Lp) {
            run.stop_reason = "reached L' = " + std::to_string(Lp) + " without halting";
            return run;
        }
        const SquareFreeModulus q = SquareFreeModulus::from_primes(step.q_primes);
        const BigInt tp = choose_tau_prime(cur, step.tau_prime_floor, q);
        run.states.push_back(leakage_step(cur, tp, q));
        if (run.states.back().F_measures.back() < target) {
            run.halted_L = run.states.back().L;
            run.stop_reason = "lambda(F_L) < 2^-M";
            return run;
        }
    }
    run.stop_reason = "schedule exhausted before lambda(F_L) < 2^-M";
    return run;
}

namespace {

Window window_level(const LeakageState& s, int L, const BigInt& x)
{
    Window w;
    if (L == 0) {
        w.defined = true;
        w.alpha = BigInt(static_cast<long>(s.base.alpha));
        w.omega = s.base.omega;
        w.tau_x = BigInt(static_cast<long>(s.base.tau_x));
        return w;
    }
    const LeakageLevel& lev = s.levels[static_cast<std::size_t>(L - 1)];
    const BigInt y = x % lev.tau_prime;
    const std::int64_t xq = BigInt(x % lev.q.q()).get_si();
    if (lev.lam_bar_prime.contains_unit(xq)) {
        if (lev.inner) {
            const KMFamily& in = *lev.inner;
            const std::int64_t u = mod_floor(xq, in.alpha.period() * in.omega.period() * in.tau_x.period());
            const Rat& a = in.alpha.at_unit(mod_floor(u, in.alpha.period()));
            const Rat& o = in.omega.at_unit(mod_floor(u, in.omega.period()));
            const Rat& t = in.tau_x.at_unit(mod_floor(u, in.tau_x.period()));
            if (a == 0) return w;
            w.defined = true;
            w.alpha = a.get_num();
            w.omega = o.get_num();
            w.tau_x = t.get_num() * lev.q.q() * lev.tau_prime;
            return w;
        }
        const Window p = window_level(s, L - 1, y);
        if (!p.defined) return w;
        w.defined = true;
        w.alpha = p.alpha;
        w.omega = lev.tau_prime * lev.q.q() * p.omega;
        w.tau_x = lev.tau_prime * lev.q.q() * p.tau_x;
        return w;
    }
    return window_level(s, L - 1, y);
}

}  // namespace

Window window_at(const LeakageState& s, const BigInt& x)
{
    BigInt xr = x % s.tau;
    if (xr < 0) xr += s.tau;
    if (s.E.contains(xr)) return {};
    return window_level(s, s.L, xr);
}

DominationSample sampled_domination(const LeakageState& s, std::int64_t samples, std::uint64_t seed)
{
    DominationSample out;
    if (s.L == 0 || s.K != 0) return out;
    const auto Fm = s.F.materialize();
    if (!Fm) return out;
    out.ran = true;
    const std::int64_t P = Fm->period();
    std::vector<std::uint8_t> bit(static_cast<std::size_t>(P), 0);
    for (const auto& iv : Fm->intervals())
        for (std::int64_t i = iv.lo; i < iv.hi; ++i) bit[static_cast<std::size_t>(i)] = 1;
    std::mt19937_64 rng(seed);
    bool first = true;
    for (std::int64_t i = 0; i < samples; ++i) {
        const std::int64_t x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(P));
        const BigInt xb(static_cast<long>(x));
        const Window w = window_at(s, xb);
        if (!w.defined) {
            ++out.undefined;
            continue;
        }
        int lvl = 0;
        while (lvl < s.L && !s.S[static_cast<std::size_t>(lvl)].contains(xb)) ++lvl;
        const Rat X = s.x_value(lvl);
        ++out.points;
        Rat avg_min;
        bool any = false;
        if (w.tau_x % P == 0) {
            if (w.omega - w.alpha >= w.tau_x) {
                std::int64_t hits = 0;
                for (std::int64_t k = 0; k < P; ++k) {
                    const std::int64_t sq = static_cast<std::int64_t>(static_cast<__int128>(k) * k % P);
                    hits += bit[static_cast<std::size_t>((x + sq) % P)];
                }
                avg_min = Rat(hits, P);
                avg_min.canonicalize();
                any = true;
            }
        } else if (fits_int64(w.omega) && w.omega - w.alpha <= (1 << 20) && fits_int64(w.tau_x)) {
            const std::int64_t a = w.alpha.get_si(), o = w.omega.get_si(), t = w.tau_x.get_si();
            std::vector<std::int64_t> pre(static_cast<std::size_t>(o - a + 1), 0);
            for (std::int64_t k = a; k < o; ++k) {
                const std::int64_t km = k % P;
                const std::int64_t sq = static_cast<std::int64_t>(static_cast<__int128>(km) * km % P);
                pre[static_cast<std::size_t>(k - a + 1)] = pre[static_cast<std::size_t>(k - a)] + bit[static_cast<std::size_t>((x + sq) % P)];
            }
            for (std::int64_t m = t; m <= o - a; m += t)
                for (std::int64_t n = a; n + m <= o; ++n) {
                    Rat v(pre[static_cast<std::size_t>(n - a + m)] - pre[static_cast<std::size_t>(n - a)], m);
                    v.canonicalize();
                    if (!any || v < avg_min) avg_min = v;
                    any = true;
                }
        } else {
            --out.points;
            ++out.undefined;
            continue;
        }
        if (!any) continue;
        const Rat margin = avg_min - X;
        if (first || margin < out.min_margin) out.min_margin = margin;
        first = false;
        if (!(avg_min > X)) {
            if (out.failed == 0) out.witness = "x=" + std::to_string(x) + ": average " + to_string(avg_min) + " <= X=" + to_string(X);
            ++out.failed;
        }
    }
    return out;
}

FinalX extract_final_X(const LeakageState& s, const std::vector<StepFunction>& peers)
{
    FinalX out;
    const M099Spec spec = M099Spec::make(s.M);
    const Rat thr0 = Rat(999, 1000);
    std::vector<Rat> v;
    for (int l = 0; l <= s.L; ++l) v.push_back(s.x_value(l));
    for (int l = 0; l < s.M; ++l) {
        const Rat thr = thr0 * pow2(-l);
        int e = -1;
        for (int j = 0; j <= s.L; ++j)
            if (v[static_cast<std::size_t>(j)] >= thr) e = j;
        out.ell.push_back(e);
        BoundCheck b;
        b.name = "threshold bracket l=" + std::to_string(l);
        if (e < 0) {
            b.holds = false;
            b.detail = "no level reaches " + to_string(thr);
        } else {
            const Rat hi = thr / (1 - 2 * s.g.gamma);
            const Rat& x = v[static_cast<std::size_t>(e)];
            b.holds = thr <= x && x < hi;
            b.margin = std::min(x - thr, hi - x);
            b.detail = to_string(thr) + " <= " + to_string(x) + " < " + to_string(hi);
        }
        out.brackets.push_back(b);
    }

    std::vector<PeriodicIntSet> S;
    for (const auto& set : s.S) {
        auto m = set.materialize();
        if (!m) {
            out.failure = "S sets above the materialize cap";
            return out;
        }
        S.push_back(*m);
    }
    std::vector<std::pair<PeriodicIntSet, Rat>> pieces;
    PeriodicIntSet prev = PeriodicIntSet::empty_set();
    bool masses_ok = true;
    for (int l = 0; l < s.M; ++l) {
        const int e = out.ell[static_cast<std::size_t>(l)];
        const PeriodicIntSet cur = e < 0 ? PeriodicIntSet::empty_set() : S[static_cast<std::size_t>(e)];
        const PeriodicIntSet diff = set_difference(cur, prev);
        const Rat m = diff.measure();
        BoundCheck b = bound_lt("ladder mass l=" + std::to_string(l), spec.mass(l), m);
        b.detail = "lambda=" + to_string(m) + " > " + to_string(spec.mass(l));
        out.masses.push_back(b);
        if (!(m >= spec.mass(l))) {
            if (masses_ok) out.failure = "super distribution fails at l=" + std::to_string(l) + ": " + b.detail;
            masses_ok = false;
        }
        if (!diff.is_empty()) pieces.push_back({diff, spec.value(l)});
        prev = cur;
    }
    if (!masses_ok) return out;
    const StepFunction super = StepFunction::from_pieces(pieces);
    try {
        out.X = trim_super(super, peers, spec);
    } catch (const ContractError& e) {
        out.failure = std::string("trim: ") + e.what();
        return out;
    }
    // pointwise below X_{K+1,L''}
    std::vector<std::pair<PeriodicIntSet, Rat>> xl;
    PeriodicIntSet below = PeriodicIntSet::empty_set();
    for (int l = 0; l <= s.L; ++l) {
        xl.push_back({set_difference(S[static_cast<std::size_t>(l)], below), v[static_cast<std::size_t>(l)]});
        below = S[static_cast<std::size_t>(l)];
    }
    const StepFunction Xfull = StepFunction::from_pieces(xl);
    if (!pointwise_le(*out.X, Xfull)) {
        out.failure = "trimmed X exceeds X_{K+1,L''}";
        return out;
    }
    out.ok = true;
    return out;
}

}  // namespace sqavg
