#include "sqavg/witness.hpp"

#include "sqavg/parallel.hpp"

#include <algorithm>
#include <array>

namespace sqavg {

namespace {

Rat frac(const BigInt& a, const BigInt& b)
{
    Rat r(a, b);
    r.canonicalize();
    return r;
}

Rat frac64(std::int64_t a, std::int64_t b) { return frac(big(a), big(b)); }

// Best prefix average over N <= N_max on the coded form.
SupAverage sup_coded(const IntCoded& c, std::int64_t period, std::int64_t x_cell, std::int64_t N_max)
{
    if (N_max < 1) throw ContractError("sup_average needs N_max >= 1");
    std::int64_t best_s = 0, best_n = 0;
    std::int64_t s = 0;
    std::int64_t kk = 0;   // k^2 mod period
    const std::int64_t x = mod_floor(x_cell, c.cells);
    for (std::int64_t k = 1; k <= N_max; ++k) {
        kk = (kk + 2 * (k - 1) + 1) % period;   // k^2 = (k-1)^2 + 2k - 1
        std::int64_t pos = x + kk * c.res;
        if (pos >= c.cells) pos -= c.cells;
        s += c.num[static_cast<std::size_t>(pos)];
        if (best_n == 0 || static_cast<__int128>(s) * best_n > static_cast<__int128>(best_s) * k) {
            best_s = s;
            best_n = k;
        }
    }
    return {frac(big(best_s), big(best_n) * c.den), best_n};
}

}  // namespace

SupAverage sup_average(const StepFunction& f, std::int64_t x_cell, std::int64_t N_max)
{
    const IntCoded c = int_coded(f);
    return sup_coded(c, f.period(), x_cell, N_max);
}

SupAverage sup_average_all(const StepFunction& f, std::int64_t x_cell)
{
    return sup_average(f, x_cell, f.period());
}

Rat sup_level_measure(const StepFunction& f, const Rat& t)
{
    const IntCoded c = int_coded(f);
    const std::int64_t P = f.period();
    // the orbit only sees cells x + k^2 R, so the sup depends on the cell
    std::vector<std::int64_t> part(chunk_count(c.cells, 256), 0);
    parallel_chunks(
        c.cells,
        [&](std::int64_t b, std::int64_t e, std::size_t ch) {
            std::int64_t n = 0;
            for (std::int64_t x = b; x < e; ++x)
                if (sup_coded(c, P, x, P).value > t) ++n;
            part[ch] = n;
        },
        256);
    std::int64_t hits = 0;
    for (auto v : part) hits += v;
    return frac64(hits, c.cells);
}

Rat weak11_ratio(const StepFunction& f, const Rat& t)
{
    if (!(t > 0)) throw ContractError("weak11_ratio needs t > 0");
    for (const auto& r : f.runs())
        if (r.value < 0) throw ContractError("weak11_ratio needs f >= 0");
    const Rat integral = f.mean();
    if (integral == 0) return Rat(0);
    return sup_level_measure(f, t) * t / integral;
}

BigInt witness_N(const BigInt& alpha, const BigInt& tau_x, const Rat& Omega)
{
    const Rat m = (Omega - 1) * Rat(alpha * tau_x);
    if (m.get_den() != 1) throw ContractError("(Omega - 1) alpha tau(x) must be an integer");
    return alpha + m.get_num() - 1;
}

Witness build_witness(const KMFamily& fam, const FamilyParams& params)
{
    if (fam.K() == 0) throw ContractError("build_witness needs K >= 1");
    Witness w;
    w.tau0 = fam.tau;
    w.Omega = params.Omega;
    w.K = fam.K();
    w.M = fam.M;
    StepFunction sum = fam.f[0];
    for (int h = 1; h < fam.K(); ++h) sum = sum + fam.f[static_cast<std::size_t>(h)];
    w.f = sum.scaled(kWitnessBoost).minimal();
    w.X_bars = fam.X;
    w.E_bar = fam.E_delta;
    w.integral_f = w.f.mean();
    w.integral_bound = fam.K() * pow2(-fam.M + 2);
    if (!(w.integral_f < w.integral_bound))
        throw ContractError("integral: integral of f = " + to_string(w.integral_f) + " is not below K 2^(-M+2) = " +
                            to_string(w.integral_bound));
    return w;
}

WitnessSweep witness_sweep(const Witness& w, const KMFamily& fam)
{
    WitnessSweep out;
    const std::int64_t P = checked_lcm(fam.structural_period(), w.f.period());
    const IntCoded fc = int_coded(w.f);

    StepFunction sx;
    for (const auto& x : w.X_bars) sx = sx + x;
    const StepFunction D = sx.restricted(w.E_bar.complement());
    const std::int64_t PD = D.period(), RD = D.resolution();
    std::vector<Rat> unit_max(static_cast<std::size_t>(PD), Rat(0));
    for (const auto& r : D.runs()) {
        if (r.value == 0) continue;
        for (std::int64_t u = r.lo / RD; u * RD < r.hi; ++u) {
            auto& m = unit_max[static_cast<std::size_t>(u)];
            if (r.value > m) m = r.value;
        }
    }

    struct Part {
        std::int64_t units = 0, failed = 0, ties = 0;
        std::string witness;
        std::optional<Rat> margin, factor;
    };
    std::vector<Part> parts(chunk_count(P, 1));
    parallel_chunks(
        P,
        [&](std::int64_t b, std::int64_t e, std::size_t ch) {
            Part& pt = parts[ch];
            for (std::int64_t j = b; j < e; ++j) {
                if (w.E_bar.contains_unit(j)) continue;
                const Rat& a = fam.alpha.at_unit(mod_floor(j, fam.alpha.period()));
                const Rat& t = fam.tau_x.at_unit(mod_floor(j, fam.tau_x.period()));
                ++pt.units;
                const Rat& X = unit_max[static_cast<std::size_t>(mod_floor(j, PD))];
                if (a == 0 || t == 0) {
                    ++pt.failed;
                    if (pt.witness.empty()) pt.witness = "unit " + std::to_string(j) + " has no window data off E";
                    continue;
                }
                const BigInt N = witness_N(a.get_num(), t.get_num(), w.Omega);
                if (!fits_int64(N)) throw ScaleError("N_x above 2^63");
                const Rat factor = Rat(N) / ((w.Omega - 1) * a * t);
                if (!pt.factor || factor > *pt.factor) pt.factor = factor;
                const SupAverage s = sup_coded(fc, w.f.period(), j * fc.res, N.get_si());
                const Rat margin = s.value - X;
                if (X == 0 && s.value == 0) {
                    ++pt.ties;
                    continue;
                }
                if (!pt.margin || margin < *pt.margin) pt.margin = margin;
                if (!(margin > 0)) {
                    ++pt.failed;
                    if (pt.witness.empty())
                        pt.witness = "x=" + std::to_string(j) + "/tau0: sup avg " + to_string(s.value) +
                                     " <= sum X-bar " + to_string(X);
                }
            }
        },
        1);
    bool first = true;
    for (auto& pt : parts) {
        out.units += pt.units;
        out.failed += pt.failed;
        out.zero_ties += pt.ties;
        if (out.witness.empty()) out.witness = pt.witness;
        if (pt.margin && (first || *pt.margin < out.min_margin)) {
            out.min_margin = *pt.margin;
            first = false;
        }
        if (pt.factor && *pt.factor > out.max_N_factor) out.max_N_factor = *pt.factor;
    }
    return out;
}

namespace {

struct DesignCounts {
    std::vector<std::int64_t> level;   // [h][l], l in 0..M
    std::vector<std::int64_t> joint;   // [pair][l1][l2]
    std::int64_t in_E = 0;
    std::int64_t weak_law = 0;
    std::int64_t u_prime = 0;
    std::int64_t dom_fail = 0;
};

}  // namespace

std::vector<WitnessReport> divergence_experiment(const std::vector<int>& p_list, const DivergenceConfig& cfg)
{
    std::vector<WitnessReport> out;
    for (int p : p_list) {
        if (p < 1) throw ConfigError("p must be positive");
        WitnessReport rep;
        rep.p = p;
        rep.delta = Rat(1, p);
        if (p > 12) {
            rep.M_p = -1;
            rep.infeasible_reason = "M_p = 4^p overflows";
            out.push_back(rep);
            continue;
        }
        const int M = 1 << (2 * p);
        rep.M_p = M;
        const Rat v099(99, 100);
        Rat u(0), second(0);
        for (int l = 0; l < M; ++l) {
            const Rat v = v099 * pow2(-l);
            const Rat m = v099 * pow2(-M + l - 1);
            u += v * m;
            second += v * v * m;
        }
        rep.u = u;
        rep.u_closed = v099 * v099 * M * pow2(-M - 1);
        rep.u_floor = Rat(9, 10) * M * pow2(-M - 1);
        rep.variance = second - u * u;
        rep.t_p = Rat(9, 20) * M * pow2(-M - 1);   // per copy; times K below
        rep.bound_32_over_Mp = Rat(32, M);

        // smallest K with 4 Var / (K u^2) < 1/p
        const Rat q = 4 * rep.variance / (u * u);
        const Rat Kr = q * p;
        BigInt K = floor_of(Kr) + 1;
        rep.K = fits_int64(K) && K < BigInt(1L << 30) ? static_cast<int>(K.get_si()) : -1;
        if (rep.K > 0) rep.chebyshev = q / rep.K;
        rep.t_p *= rep.K;
        if (M > 24) {
            rep.infeasible_reason = "M_p = " + std::to_string(M) + " exceeds the M-0.99 grid limit";
            out.push_back(rep);
            continue;
        }
        const M099Spec spec = M099Spec::make(M);
        const int max_K = std::min<std::int64_t>(cfg.max_K, std::int64_t{1} << (M + 3));
        if (rep.K < 1 || rep.K > max_K) {
            rep.infeasible_reason = "needs K = " + (rep.K > 0 ? std::to_string(rep.K) : to_string(K)) +
                                    " pairwise independent copies, design capacity " + std::to_string(max_K);
            out.push_back(rep);
            continue;
        }
        const int Kc = rep.K;

        // threshold family
        const Rat cap = cfg.Gamma * pow2(-M + 1);
        int l0 = 0;
        while (l0 < M && !(spec.value(l0) < cap)) ++l0;
        rep.threshold = (spec.value(l0) + cap) / 2;
        const Rat fsum = kWitnessBoost * Kc * rep.threshold;

        FamilyParams fp;
        fp.delta = rep.delta;
        fp.Omega = cfg.Omega;
        fp.Gamma = cfg.Gamma;
        fp.A = cfg.A;
        const WindowRecipe wr = window_recipe(fp);
        rep.tau0 = wr.tau;
        rep.N_x = witness_N(big(wr.alpha), big(wr.tau_x), cfg.Omega);
        rep.N_factor = Rat(rep.N_x) / ((cfg.Omega - 1) * Rat(big(wr.alpha) * big(wr.tau_x)));

        // exact counts on the design: sum X in units of 0.99 2^-(M-1)
        const AffineDesign design(spec, Kc, cfg.seed);
        const std::int64_t N = design.field_size();
        const Rat unit = v099 * pow2(-(M - 1));
        const BigInt s_weak = ceil_of(Kc * u / 2 / unit);                      // s >= s_weak
        const BigInt s_up = floor_of(rep.t_p / unit) + 1;                       // s > t_p / unit
        const BigInt s_dom = ceil_of(fsum / unit);                              // s >= s_dom fails
        const std::int64_t sw = s_weak.get_si(), su = s_up.get_si(), sd = s_dom.get_si();
        const int L1 = M + 1;
        const std::size_t pairs = static_cast<std::size_t>(Kc * (Kc - 1) / 2);
        std::vector<DesignCounts> parts(chunk_count(N, 1));
        parallel_chunks(
            N,
            [&](std::int64_t b, std::int64_t e, std::size_t ch) {
                DesignCounts& dc = parts[ch];
                dc.level.assign(static_cast<std::size_t>(Kc * L1), 0);
                if (cfg.verify_design) dc.joint.assign(pairs * static_cast<std::size_t>(L1 * L1), 0);
                std::vector<std::int64_t> sh(static_cast<std::size_t>(Kc));
                std::vector<int> lv(static_cast<std::size_t>(Kc));
                for (std::int64_t v = b; v < e; ++v) {
                    for (int h = 0; h < Kc; ++h) sh[static_cast<std::size_t>(h)] = design.shift(h, v);
                    for (std::int64_t uu = 0; uu < N; ++uu) {
                        std::int64_t s = 0;
                        bool inE = false;
                        for (int h = 0; h < Kc; ++h) {
                            const int l = design.level_shifted(uu, sh[static_cast<std::size_t>(h)]);
                            lv[static_cast<std::size_t>(h)] = l;
                            ++dc.level[static_cast<std::size_t>(h * L1 + l)];
                            if (l < M) s += std::int64_t{1} << (M - 1 - l);
                            if (l < l0) inE = true;
                        }
                        if (cfg.verify_design) {
                            std::size_t pi = 0;
                            for (int a = 0; a < Kc; ++a)
                                for (int c = a + 1; c < Kc; ++c, ++pi)
                                    ++dc.joint[pi * static_cast<std::size_t>(L1 * L1) +
                                               static_cast<std::size_t>(lv[static_cast<std::size_t>(a)] * L1 +
                                                                        lv[static_cast<std::size_t>(c)])];
                        }
                        if (inE) ++dc.in_E;
                        if (s >= sw) ++dc.weak_law;
                        if (s >= su) ++dc.u_prime;
                        if (!inE && s >= sd) ++dc.dom_fail;
                    }
                }
            },
            1);
        DesignCounts tot;
        tot.level.assign(static_cast<std::size_t>(Kc * L1), 0);
        tot.joint.assign(cfg.verify_design ? pairs * static_cast<std::size_t>(L1 * L1) : 0, 0);
        for (const auto& dc : parts) {
            for (std::size_t i = 0; i < tot.level.size(); ++i) tot.level[i] += dc.level[i];
            for (std::size_t i = 0; i < tot.joint.size(); ++i) tot.joint[i] += dc.joint[i];
            tot.in_E += dc.in_E;
            tot.weak_law += dc.weak_law;
            tot.u_prime += dc.u_prime;
            tot.dom_fail += dc.dom_fail;
        }
        const std::int64_t cells = design.cells();
        rep.measure_E = frac64(tot.in_E, cells);
        rep.weak_law_measure = frac64(tot.weak_law, cells);
        rep.measure_U_prime = frac64(tot.u_prime, cells);
        rep.domination_failures = tot.dom_fail;
        rep.design_m099 = true;
        for (int h = 0; h < Kc; ++h)
            for (int l = 0; l < M; ++l)
                if (frac64(tot.level[static_cast<std::size_t>(h * L1 + l)], cells) != spec.mass(l)) rep.design_m099 = false;
        if (cfg.verify_design) {
            rep.design_pairwise = true;
            std::size_t pi = 0;
            for (int a = 0; a < Kc; ++a)
                for (int c = a + 1; c < Kc; ++c, ++pi)
                    for (int l1 = 0; l1 < L1; ++l1)
                        for (int l2 = 0; l2 < L1; ++l2) {
                            const __int128 lhs = static_cast<__int128>(
                                                     tot.joint[pi * static_cast<std::size_t>(L1 * L1) +
                                                               static_cast<std::size_t>(l1 * L1 + l2)]) *
                                                 cells;
                            const __int128 rhs = static_cast<__int128>(tot.level[static_cast<std::size_t>(a * L1 + l1)]) *
                                                 tot.level[static_cast<std::size_t>(c * L1 + l2)];
                            if (lhs != rhs) rep.design_pairwise = false;
                        }
        }

        rep.f = StepFunction::constant(fsum);
        rep.integral_f = rep.f.mean();
        rep.integral_bound = Kc * pow2(-M + 2);
        rep.sup_value = sup_average(rep.f, 0, fits_int64(rep.N_x) ? rep.N_x.get_si() : 1).value;
        rep.measure_U = sup_level_measure(rep.f, rep.t_p);
        rep.ratio = rep.integral_f / rep.t_p;
        rep.weak11 = rep.integral_f == 0 ? Rat(0) : rep.measure_U * rep.t_p / rep.integral_f;

        rep.feasible = true;
        if (!(rep.measure_E < rep.delta)) {
            rep.feasible = false;
            rep.infeasible_reason = "lambda(E) = " + to_string(rep.measure_E) + " is not below delta = " + to_string(rep.delta);
        } else if (!(rep.integral_f < rep.integral_bound)) {
            rep.feasible = false;
            rep.infeasible_reason = "integral bound fails";
        } else if (!rep.design_m099 || (cfg.verify_design && !rep.design_pairwise)) {
            rep.feasible = false;
            rep.infeasible_reason = "design is not pairwise independent M-0.99";
        } else if (rep.domination_failures != 0) {
            rep.feasible = false;
            rep.infeasible_reason = "domination fails on " + std::to_string(rep.domination_failures) + " cells";
        }
        out.push_back(rep);
    }
    return out;
}

}  // namespace sqavg
