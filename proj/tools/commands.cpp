#include "commands.hpp"

#include "sqavg/family.hpp"
#include "sqavg/io.hpp"
#include "sqavg/leakage.hpp"
#include "sqavg/m099.hpp"
#include "sqavg/modulus.hpp"
#include "sqavg/residue_stats.hpp"
#include "sqavg/step_function.hpp"
#include "sqavg/witness.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace sqavg::cli {

namespace {

std::uint64_t seed_of(const json& sc, const RunFlags& fl)
{
    if (fl.has_seed) return fl.seed;
    return static_cast<std::uint64_t>(get_int(sc, "seed", 1));
}

std::string q_str(const SquareFreeModulus& q) { return to_string(q.q()); }

json moduli_json(const std::vector<SquareFreeModulus>& ms)
{
    json a = json::array();
    for (const auto& m : ms) a.push_back(m.primes());
    return a;
}

FamilyParams family_params(const json& sc, const std::string& Gamma_def, const std::string& Omega_def)
{
    FamilyParams p;
    p.delta = get_rat(sc, "delta", Rat(1, 10));
    p.Omega = get_rat(sc, "Omega", parse_rational(Omega_def));
    p.Gamma = get_rat(sc, "Gamma", parse_rational(Gamma_def));
    p.A = get_int(sc, "A", 1);
    p.validate();
    return p;
}

void family_config(json& c, const FamilyParams& p)
{
    c["delta"] = to_string(p.delta);
    c["Omega"] = to_string(p.Omega);
    c["Gamma"] = to_string(p.Gamma);
    c["A"] = p.A;
}

void clause_rows(Report& r, const std::string& key, const std::string& prefix, const FamilyReport& fr, json& out)
{
    json a = json::array();
    for (const auto& c : fr.clauses) {
        r.csv_rows.push_back({key, c.clause, yes_no(c.pass), std::to_string(c.checked), c.witness, c.note});
        r.check(prefix + c.clause, c.pass, c.pass ? c.note : c.witness);
        a.push_back({{"clause", c.clause}, {"pass", c.pass}, {"checked", c.checked}, {"witness", c.witness}, {"note", c.note}});
    }
    out["clauses"] = a;
    out["zero_ties"] = fr.zero_ties;
}

// ---------------------------------------------------------------- residues

void cmd_residues(const json& sc, const RunFlags&, Report& r)
{
    const auto moduli = get_moduli(sc, "moduli", json::array({json::array({3, 5})}));
    const GammaParam g = get_gamma(sc, "gamma", "1/2");
    const std::int64_t brute_cap = get_int(sc, "brute_cap", 1'000'000);
    r.config["moduli"] = moduli_json(moduli);
    r.config["gamma"] = to_string(g.gamma);
    r.config["brute_cap"] = brute_cap;

    r.csv_header = {"q", "primes", "kappa", "sigma", "sigma_brute", "sigma_prime", "window", "measure_lambda_bar",
                    "measure_lambda_bar_prime"};
    json rows = json::array();
    for (const auto& q : moduli) {
        const BigInt s = sigma(q);
        std::string brute = "skipped";
        if (q.q64() <= brute_cap) {
            const std::int64_t n = q.q64();
            std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
            std::int64_t distinct = 0;
            for (std::int64_t k = 0; k < n; ++k) {
                const auto v = static_cast<std::size_t>(static_cast<__int128>(k) * k % n);
                if (!seen[v]) {
                    seen[v] = 1;
                    ++distinct;
                }
            }
            brute = std::to_string(distinct);
            r.check("sigma formula q=" + q_str(q), BigInt(static_cast<long>(distinct)) == s,
                    "sigma=" + to_string(s) + " brute=" + brute);
        }
        const std::string window = q.kappa() >= g.c ? std::to_string(g.window(q.kappa())) : "undefined";
        std::string m_bar = "undefined", m_bar_p = "undefined";
        if (q.kappa() >= g.c) {
            m_bar = to_string(build_lambda_bar(q, g, false).measure());
            m_bar_p = to_string(build_lambda_bar(q, g, true).measure());
        }
        r.csv_rows.push_back({q_str(q), primes_label(q), std::to_string(q.kappa()), to_string(s), brute,
                              to_string(sigma_prime(q)), window, m_bar, m_bar_p});
        rows.push_back({{"q", q_str(q)},
                        {"sigma", to_string(s)},
                        {"sigma_brute", brute},
                        {"window", window},
                        {"measure_lambda_bar", m_bar},
                        {"measure_lambda_bar_prime", m_bar_p}});
        r.summary << "q=" << q_str(q) << " sigma=" << to_string(s) << " measure(Lambda-bar)=" << m_bar << "\n";
    }
    r.results["rows"] = rows;
}

// ---------------------------------------------------------------- patterns

void cmd_patterns(const json& sc, const RunFlags&, Report& r)
{
    const auto moduli = get_moduli(sc, "moduli", json::array({11, 101, 1009}));
    const auto offsets = get_int_list(sc, "offsets", {0, 1, 2});
    r.config["moduli"] = moduli_json(moduli);
    r.config["offsets"] = offsets;
    const int K = static_cast<int>(offsets.size());

    r.csv_header = {"q", "primes", "kappa", "max_deviation", "max_deviation_approx", "prime_bound"};
    json rows = json::array();
    std::vector<Rat> devs;
    for (const auto& q : moduli) {
        const Rat dev = bernoulli_deviation(q, offsets);
        devs.push_back(dev);
        std::string pb = "n/a";
        if (q.kappa() == 1) {
            const auto counts = pattern_counts_all(q, offsets);
            bool ok = true;
            for (auto nu : counts) ok = ok && prime_pattern_bound_holds(q.q64(), K, nu);
            pb = yes_no(ok);
            r.check("prime pattern bound p=" + q_str(q), ok, "K=" + std::to_string(K));
        }
        r.csv_rows.push_back({q_str(q), primes_label(q), std::to_string(q.kappa()), to_string(dev),
                              approx(to_double(dev)), pb});
        rows.push_back({{"q", q_str(q)}, {"max_deviation", to_string(dev)}, {"prime_bound", pb}});
        r.summary << "q=" << q_str(q) << " max deviation " << approx(to_double(dev)) << "\n";
    }
    bool mono = true;
    for (std::size_t i = 1; i < devs.size(); ++i) mono = mono && devs[i] <= devs[i - 1];
    r.bound("deviation non-increasing along the ladder", mono);
    r.results["rows"] = rows;
    r.results["non_increasing"] = mono;
}

// ---------------------------------------------------------------- gaps

void cmd_gaps(const json& sc, const RunFlags&, Report& r)
{
    const auto moduli = get_moduli(sc, "moduli", json::array({105, 255255}));
    r.config["moduli"] = moduli_json(moduli);
    r.csv_header = {"q", "primes", "kappa", "coprime_squares", "mean_gap", "ks_distance_approx"};
    json rows = json::array();
    std::vector<double> ks;
    for (const auto& q : moduli) {
        const GapStats gs = gap_stats(q);
        const double d = ks_exponential(gs);
        ks.push_back(d);
        std::int64_t total = 0;
        for (auto x : gs.gaps) total += x;
        r.check("gaps tile the period q=" + q_str(q), total == q.q64(), "sum of gaps " + std::to_string(total));
        r.check("coprime square count q=" + q_str(q), BigInt(static_cast<long>(gs.sigma)) == sigma_prime(q),
                std::to_string(gs.sigma) + " vs " + to_string(sigma_prime(q)));
        r.csv_rows.push_back({q_str(q), primes_label(q), std::to_string(q.kappa()), std::to_string(gs.sigma),
                              to_string(gs.mean_gap), approx(d)});
        rows.push_back({{"q", q_str(q)}, {"coprime_squares", gs.sigma}, {"mean_gap", to_string(gs.mean_gap)},
                        {"ks_distance_approx", approx(d)}});
        r.summary << "q=" << q_str(q) << " KS distance " << approx(d) << " (approximate)\n";
    }
    bool dec = true;
    for (std::size_t i = 1; i < ks.size(); ++i) dec = dec && ks[i] < ks[i - 1];
    r.bound("KS distance decreasing along the ladder", dec);
    r.results["rows"] = rows;
}

// ---------------------------------------------------------------- deficiency

void cmd_deficiency(const json& sc, const RunFlags&, Report& r)
{
    const GammaParam g = get_gamma(sc, "gamma", "1/4");
    const Rat rho_t = get_rat(sc, "rho_tilde", Rat(1, 5));
    const auto moduli = get_moduli(sc, "moduli",
                                   json::array({json::array({11, 13}), json::array({101, 103}), json::array({1009, 1013})}));
    r.config["gamma"] = to_string(g.gamma);
    r.config["rho_tilde"] = to_string(rho_t);
    r.config["moduli"] = moduli_json(moduli);
    r.csv_header = {"q", "primes", "kappa", "bad_count", "fraction", "fraction_approx"};
    json rows = json::array();
    std::vector<Rat> fr;
    for (const auto& q : moduli) {
        const Deficiency d = translate_deficiency(q, g, rho_t);
        fr.push_back(d.fraction);
        r.csv_rows.push_back({q_str(q), primes_label(q), std::to_string(q.kappa()), std::to_string(d.bad_count),
                              to_string(d.fraction), approx(to_double(d.fraction))});
        rows.push_back({{"q", q_str(q)}, {"bad_count", d.bad_count}, {"fraction", to_string(d.fraction)}});
        r.summary << "q=" << q_str(q) << " violating fraction " << to_string(d.fraction) << "\n";
    }
    bool mono = true;
    for (std::size_t i = 1; i < fr.size(); ++i) mono = mono && fr[i] <= fr[i - 1];
    r.bound("violating fraction non-increasing", mono);
    if (!fr.empty()) r.bound("final violating fraction below 1/10", fr.back() < Rat(1, 10), to_string(fr.back()));
    r.results["rows"] = rows;
}

// ---------------------------------------------------------------- rearrange

void cmd_rearrange(const json& sc, const RunFlags& fl, Report& r)
{
    PeriodicIntSet F = PeriodicIntSet::unit_range(3, 0, 1);
    if (sc.contains("F")) F = periodic_set_from_json(sc.at("F").dump());
    const Rat rho = get_rat(sc, "rho", Rat(1, 4));
    const std::int64_t tau_max = get_int(sc, "tau_max", 20000);
    const std::int64_t samples = get_int(sc, "samples", 100);
    const std::int64_t n_range = get_int(sc, "n_range", std::int64_t{1} << 20);
    const std::uint64_t seed = seed_of(sc, fl);
    r.config["F"] = json::parse(periodic_set_to_json(F));
    r.config["rho"] = to_string(rho);
    r.config["tau_max"] = tau_max;
    r.config["samples"] = samples;
    r.config["n_range"] = n_range;
    r.config["seed"] = seed;

    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> ns;
    for (std::int64_t i = 0; i < samples; ++i) ns.push_back(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n_range)));

    r.csv_header = {"tau", "checked", "failed", "min_average", "threshold", "mode"};
    auto row = [&](const RearrangementReport& rep, const std::string& mode) {
        r.csv_rows.push_back({std::to_string(rep.tau), std::to_string(rep.checked), std::to_string(rep.failed),
                              to_string(rep.min_average), to_string(rep.threshold), mode});
        std::string w;
        if (!rep.pass()) w = "x=" + std::to_string(rep.witness_x) + " n=" + std::to_string(rep.witness_n);
        r.check("rearranged average bound tau=" + std::to_string(rep.tau) + " (" + mode + ")", rep.pass(),
                rep.pass() ? "min " + to_string(rep.min_average) + " >= " + to_string(rep.threshold) : w);
    };
    if (sc.contains("tau")) {
        const std::int64_t tau = get_int(sc, "tau", 0);
        r.config["tau"] = tau;
        const RearrangementReport rep = rearrangement_check(F, tau, rho, ns);
        row(rep, "replay");
        r.results["tau"] = tau;
        r.summary << "replayed tau=" << tau << (rep.pass() ? " holds" : " fails") << "\n";
        return;
    }
    const RearrangementSearch s = rearrangement_search(F, rho, tau_max, ns);
    r.results["tried"] = s.tried;
    r.results["tau"] = s.tau;
    if (s.tau == 0) {
        r.check("prime tau found", false, "no prime tau <= " + std::to_string(tau_max));
        return;
    }
    row(s.report, "search");
    r.summary << "smallest prime tau=" << s.tau << " after " << s.tried << " candidates\n";
}

// ---------------------------------------------------------------- family-verify

void cmd_family_verify(const json& sc, const RunFlags& fl, Report& r)
{
    const FamilyParams p = family_params(sc, "11/10", "2");
    const int M = static_cast<int>(get_int(sc, "M", 1));
    const int K = static_cast<int>(get_int(sc, "K", 1));
    const std::string kind = sc.value("kind", std::string("base"));
    const std::uint64_t seed = seed_of(sc, fl);
    VerifyOptions opt;
    opt.exhaustive = get_bool(sc, "exhaustive", true);
    opt.samples = get_int(sc, "samples", opt.samples);
    opt.seed = seed;
    family_config(r.config, p);
    r.config["M"] = M;
    r.config["K"] = K;
    r.config["kind"] = kind;
    r.config["exhaustive"] = opt.exhaustive;
    r.config["samples"] = opt.samples;
    r.config["seed"] = seed;

    KMFamily fam;
    if (kind == "base") {
        fam = make_base_family(p, M, K, seed);
    } else if (kind == "constant") {
        const Rat v = get_rat(sc, "value", Rat(1, 2));
        r.config["value"] = to_string(v);
        fam = make_constant_family(p, M, K, v);
    } else {
        throw ConfigError("kind must be \"base\" or \"constant\"");
    }
    r.csv_header = {"family", "clause", "pass", "checked", "witness", "note"};
    json out;
    out["tau"] = to_string(fam.tau);
    clause_rows(r, kind, "", verify_family(fam, p, opt), out);
    r.results = out;
    r.summary << kind << " family, tau=" << to_string(fam.tau) << "\n";
}

// ---------------------------------------------------------------- lift

void cmd_lift(const json& sc, const RunFlags& fl, Report& r)
{
    const FamilyParams p = family_params(sc, "5/2", "2");
    const int M = static_cast<int>(get_int(sc, "M", 2));
    const int K = static_cast<int>(get_int(sc, "K", 2));
    const GammaParam g = get_gamma(sc, "gamma", "1/2");
    const auto qts = get_moduli(sc, "q_tilde", json::array({15}));
    const std::uint64_t seed = seed_of(sc, fl);
    VerifyOptions opt;
    opt.exhaustive = get_bool(sc, "exhaustive", true);
    opt.seed = seed;
    family_config(r.config, p);
    r.config["M"] = M;
    r.config["K"] = K;
    r.config["gamma"] = to_string(g.gamma);
    r.config["q_tilde"] = moduli_json(qts);
    r.config["seed"] = seed;
    r.config["exhaustive"] = opt.exhaustive;

    r.csv_header = {"q_tilde", "clause", "pass", "checked", "witness", "note"};
    json lifts = json::array();
    for (const auto& qt : qts) {
        const std::string tag = "q~=" + q_str(qt) + " ";
        FamilyParams inner = p;
        inner.Omega = p.Omega * Rat(qt.q());
        const KMFamily lifted = lifted_family(p, M, K, qt, g, seed);
        json o;
        o["q_tilde"] = q_str(qt);
        o["tau"] = to_string(lifted.tau);
        clause_rows(r, q_str(qt), tag, verify_family(lifted, p, opt), o);

        const KMFamily base_for_transport = make_base_family(inner, M, K, seed, qt.primes());
        const TransportReport tr = lift_transport_check(base_for_transport, lifted, qt);
        r.check(tag + "domination transport", tr.pass(),
                std::to_string(tr.checked) + " windows, " + std::to_string(tr.failed) + " failures, min margin " +
                    to_string(tr.min_margin));
        r.csv_rows.push_back({q_str(qt), "transport", yes_no(tr.pass()), std::to_string(tr.checked),
                              tr.pass() ? "" : std::to_string(tr.failed) + " failures", "min margin " + to_string(tr.min_margin)});
        const Rat cap = p.Gamma * g.gamma * pow2(-M + 1);
        bool mean_ok = true;
        std::string means;
        for (const auto& f : lifted.f) {
            mean_ok = mean_ok && f.mean() <= cap;
            means += (means.empty() ? "" : ",") + to_string(f.mean());
        }
        r.check(tag + "mean bound", mean_ok, "means " + means + " <= " + to_string(cap));
        r.csv_rows.push_back({q_str(qt), "mean bound", yes_no(mean_ok), std::to_string(lifted.f.size()), "", means + " <= " + to_string(cap)});
        o["transport"] = {{"checked", tr.checked}, {"failed", tr.failed}, {"min_margin", to_string(tr.min_margin)}};
        o["means"] = means;
        lifts.push_back(o);
        r.summary << tag << "tau=" << to_string(lifted.tau) << " transport windows " << tr.checked << "\n";
    }
    r.results["lifts"] = lifts;
}

// ---------------------------------------------------------------- leakage

LeakageConfig leakage_config(const json& sc, std::uint64_t seed)
{
    LeakageConfig c;
    c.rho = get_rat(sc, "rho", c.rho);
    c.rho_prime = get_rat(sc, "rho_prime", c.rho_prime);
    c.rho_tilde = get_rat(sc, "rho_tilde", c.rho_tilde);
    c.approx_tolerance = get_rat(sc, "approx_tolerance", c.approx_tolerance);
    c.tau_floor_factor = get_int(sc, "tau_floor_factor", c.tau_floor_factor);
    c.tau_bar_exponent = static_cast<int>(get_int(sc, "tau_bar_exponent", c.tau_bar_exponent));
    c.identity_samples = get_int(sc, "identity_samples", c.identity_samples);
    c.seed = seed;
    return c;
}

json bound_json(const BoundCheck& b)
{
    return {{"name", b.name}, {"holds", b.holds}, {"margin", to_string(b.margin)}, {"detail", b.detail}};
}

void cmd_leakage(const json& sc, const RunFlags& fl, Report& r)
{
    const FamilyParams p = family_params(sc, "5/2", "2");
    const int M = static_cast<int>(get_int(sc, "M", 3));
    const int K = static_cast<int>(get_int(sc, "K", 0));
    const GammaParam g = get_gamma(sc, "gamma", "1/4");
    const std::uint64_t seed = seed_of(sc, fl);
    const LeakageConfig cfg = leakage_config(sc, seed);
    std::vector<ScheduleStep> schedule;
    const json sched = sc.contains("schedule") ? sc.at("schedule")
                                               : json::array({{{"q", {101, 103}}}, {{"q", {107, 109}}}, {{"q", {113, 127}}}});
    for (const auto& st : sched) {
        ScheduleStep s;
        s.q_primes = modulus_of(st.at("q")).primes();
        if (st.contains("tau_prime_floor")) s.tau_prime_floor = parse_bigint(st.at("tau_prime_floor").get<std::string>());
        schedule.push_back(s);
    }
    const std::int64_t dom_samples = get_int(sc, "domination_samples", 200);
    family_config(r.config, p);
    r.config["M"] = M;
    r.config["K"] = K;
    r.config["gamma"] = to_string(g.gamma);
    r.config["seed"] = seed;
    r.config["schedule"] = sched;
    r.config["rho"] = to_string(cfg.rho);
    r.config["rho_prime"] = to_string(cfg.rho_prime);
    r.config["rho_tilde"] = to_string(cfg.rho_tilde);
    r.config["approx_tolerance"] = to_string(cfg.approx_tolerance);
    r.config["tau_floor_factor"] = cfg.tau_floor_factor;
    r.config["tau_bar_exponent"] = cfg.tau_bar_exponent;
    r.config["identity_samples"] = cfg.identity_samples;
    r.config["domination_samples"] = dom_samples;

    const LeakageRun run = leakage_run(p, M, K, g, cfg, schedule);
    const LeakageState& last = run.states.back();
    r.csv_header = {"L", "tau_prime", "q", "k", "r", "lambda_F", "lambda_Phi", "lambda_Psi", "lambda_lambda_bar_prime",
                    "E_lo", "E_hi", "E_exact", "Phi_empty", "identities"};
    json levels = json::array();
    for (const auto& lev : last.levels) {
        json lj;
        lj["L"] = lev.L;
        lj["tau_prime"] = to_string(lev.tau_prime);
        lj["q"] = q_str(lev.q);
        lj["tau"] = to_string(lev.tau);
        lj["r"] = to_string(lev.r);
        lj["lambda_F"] = to_string(lev.m_F);
        lj["lambda_Phi"] = to_string(lev.m_phi);
        lj["lambda_Psi"] = to_string(lev.m_psi);
        lj["lambda_S"] = json::array();
        for (const auto& m : lev.m_S) lj["lambda_S"].push_back(to_string(m));
        lj["E"] = {{"lo", to_string(lev.m_E.lo)}, {"hi", to_string(lev.m_E.hi)}, {"exact", lev.m_E.exact}};
        lj["lambda_bar_prime_in_Psi"] = to_string(lev.lam_in_psi);
        json ids = json::array();
        for (const auto& c : lev.identities) {
            ids.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            r.check("L=" + std::to_string(lev.L) + " " + c.name, c.pass, c.detail);
        }
        lj["identities"] = ids;
        json bs = json::array();
        for (const auto& b : lev.bounds) {
            bs.push_back(bound_json(b));
            r.bound("L=" + std::to_string(lev.L) + " " + b.name, b.holds, b.detail + " margin " + to_string(b.margin));
        }
        lj["bounds"] = bs;
        levels.push_back(lj);
        r.csv_rows.push_back({std::to_string(lev.L), to_string(lev.tau_prime), q_str(lev.q), to_string(lev.k),
                              to_string(lev.r), to_string(lev.m_F), to_string(lev.m_phi), to_string(lev.m_psi),
                              to_string(lev.m_lam_bar_prime), to_string(lev.m_E.lo), to_string(lev.m_E.hi),
                              yes_no(lev.m_E.exact), yes_no(lev.phi_empty), yes_no(lev.identities_pass())});
        r.summary << "L=" << lev.L << " r=" << approx(to_double(lev.r)) << " lambda(F)=" << approx(to_double(lev.m_F))
                  << " identities " << (lev.identities_pass() ? "hold" : "FAIL") << "\n";
    }
    r.results["levels"] = levels;
    r.results["L_prime"] = last.L_prime();
    r.results["halted_L"] = run.halted_L;
    r.results["stop_reason"] = run.stop_reason;

    bool dec = true;
    for (std::size_t i = 1; i < last.F_measures.size(); ++i) dec = dec && last.F_measures[i] < last.F_measures[i - 1];
    r.bound("halting: lambda(F_L) < 2^-M at some L <= L'", run.halted_L >= 0 && run.halted_L <= last.L_prime(),
            run.stop_reason + ", lambda(F)=" + to_string(last.F_measures.back()) + " vs " + to_string(pow2(-M)));
    r.bound("lambda(F_L) strictly decreasing", dec);

    if (last.L > 0 && K == 0) {
        const DominationSample d = sampled_domination(last, dom_samples, seed);
        r.results["domination"] = {{"ran", d.ran},
                                   {"points", d.points},
                                   {"failed", d.failed},
                                   {"undefined", d.undefined},
                                   {"min_margin", to_string(d.min_margin)},
                                   {"witness", d.witness}};
        if (d.ran) r.bound("sampled domination", d.failed == 0, d.witness.empty() ? std::to_string(d.points) + " points" : d.witness);
    }
    if (run.halted_L >= 0) {
        const FinalX fx = extract_final_X(last, last.X);
        json fj{{"ok", fx.ok}, {"failure", fx.failure}, {"ell", fx.ell}};
        for (const auto& b : fx.brackets) r.bound(b.name, b.holds, b.detail);
        for (const auto& b : fx.masses) r.bound(b.name, b.holds, b.detail);
        r.bound("final X extraction", fx.ok, fx.failure);
        r.results["final_X"] = fj;
    }
    r.summary << "stop: " << run.stop_reason << "\n";
}

// ---------------------------------------------------------------- witness

void cmd_witness(const json& sc, const RunFlags& fl, Report& r)
{
    const std::uint64_t seed = seed_of(sc, fl);
    DivergenceConfig dc;
    dc.Gamma = get_rat(sc, "Gamma", dc.Gamma);
    dc.Omega = get_rat(sc, "Omega", dc.Omega);
    dc.A = get_int(sc, "A", dc.A);
    dc.seed = seed;
    dc.verify_design = get_bool(sc, "verify_design", true);
    std::vector<int> ps;
    for (auto v : get_int_list(sc, "p", {1, 2})) ps.push_back(static_cast<int>(v));
    r.config["p"] = ps;
    r.config["Gamma"] = to_string(dc.Gamma);
    r.config["Omega"] = to_string(dc.Omega);
    r.config["A"] = dc.A;
    r.config["seed"] = seed;
    r.config["verify_design"] = dc.verify_design;

    r.csv_header = {"p", "M_p", "K", "tau0", "t_p", "measure_U", "integral_f", "ratio", "bound", "feasible", "weak11"};
    json reps = json::array();
    for (const auto& w : divergence_experiment(ps, dc)) {
        const std::string tag = "p=" + std::to_string(w.p) + " ";
        r.check(tag + "mean matches closed form", w.u == w.u_closed, to_string(w.u) + " vs " + to_string(w.u_closed));
        r.check(tag + "mean above 0.9 M 2^(-M-1)", w.u > w.u_floor, to_string(w.u) + " > " + to_string(w.u_floor));
        r.bound(tag + "feasible at desk scale", w.feasible, w.infeasible_reason);
        if (w.feasible) {
            r.check(tag + "integral bound", w.integral_f < w.integral_bound,
                    to_string(w.integral_f) + " < " + to_string(w.integral_bound));
            r.check(tag + "ratio below 32/M_p", w.ratio < w.bound_32_over_Mp,
                    to_string(w.ratio) + " < " + to_string(w.bound_32_over_Mp));
            r.check(tag + "design exact", w.design_m099 && w.design_pairwise);
            r.check(tag + "domination off E", w.domination_failures == 0, std::to_string(w.domination_failures) + " cells");
            r.check(tag + "weak-law set", w.weak_law_measure > 1 - w.delta,
                    to_string(w.weak_law_measure) + " > " + to_string(1 - w.delta));
            r.bound(tag + "lambda(U~) > 1 - 2/p", w.measure_U > 1 - 2 * w.delta, to_string(w.measure_U));
        }
        r.csv_rows.push_back({std::to_string(w.p), std::to_string(w.M_p), std::to_string(w.K), to_string(w.tau0),
                              to_string(w.t_p), to_string(w.measure_U), to_string(w.integral_f), to_string(w.ratio),
                              to_string(w.bound_32_over_Mp), yes_no(w.feasible), to_string(w.weak11)});
        reps.push_back({{"p", w.p},
                        {"M_p", w.M_p},
                        {"K", w.K},
                        {"feasible", w.feasible},
                        {"infeasible_reason", w.infeasible_reason},
                        {"u", to_string(w.u)},
                        {"u_closed", to_string(w.u_closed)},
                        {"variance", to_string(w.variance)},
                        {"chebyshev", to_string(w.chebyshev)},
                        {"tau0", to_string(w.tau0)},
                        {"threshold", to_string(w.threshold)},
                        {"measure_E", to_string(w.measure_E)},
                        {"weak_law_measure", to_string(w.weak_law_measure)},
                        {"measure_U_prime", to_string(w.measure_U_prime)},
                        {"N_x", to_string(w.N_x)},
                        {"N_factor", to_string(w.N_factor)},
                        {"f", json::parse(step_function_to_json(w.f))},
                        {"integral_f", to_string(w.integral_f)},
                        {"t_p", to_string(w.t_p)},
                        {"sup_value", to_string(w.sup_value)},
                        {"measure_U", to_string(w.measure_U)},
                        {"ratio", to_string(w.ratio)},
                        {"bound", to_string(w.bound_32_over_Mp)},
                        {"weak11", to_string(w.weak11)}});
        r.summary << tag << "M_p=" << w.M_p << " K=" << w.K << " "
                  << (w.feasible ? "ratio " + to_string(w.ratio) + " vs 32/M_p " + to_string(w.bound_32_over_Mp)
                                 : "infeasible: " + w.infeasible_reason)
                  << "\n";
    }
    r.results["divergence"] = reps;

    // witness assembled from a lifted family
    if (sc.contains("family")) {
        const json& fj = sc.at("family");
        const FamilyParams p = family_params(fj, "5/2", "2");
        const int M = static_cast<int>(get_int(fj, "M", 2));
        const int K = static_cast<int>(get_int(fj, "K", 2));
        const GammaParam g = get_gamma(fj, "gamma", "1/2");
        const auto qt = modulus_of(fj.value("q_tilde", json(15)));
        r.config["family"] = fj;
        const KMFamily fam = lifted_family(p, M, K, qt, g, seed);
        const Witness w = build_witness(fam, p);
        const WitnessSweep s = witness_sweep(w, fam);
        r.check("family witness integral bound", w.integral_f < w.integral_bound,
                to_string(w.integral_f) + " < " + to_string(w.integral_bound));
        r.check("family witness sup average above sum of X", s.failed == 0,
                s.failed ? s.witness : std::to_string(s.units) + " grid points, min margin " + to_string(s.min_margin));
        r.bound("N_x factor below 1.01", s.max_N_factor < kWitnessBoost, to_string(s.max_N_factor));
        r.results["family_witness"] = {{"tau0", to_string(w.tau0)},
                                       {"integral_f", to_string(w.integral_f)},
                                       {"integral_bound", to_string(w.integral_bound)},
                                       {"units", s.units},
                                       {"failed", s.failed},
                                       {"zero_ties", s.zero_ties},
                                       {"min_margin", to_string(s.min_margin)},
                                       {"max_N_factor", to_string(s.max_N_factor)},
                                       {"f", json::parse(step_function_to_json(w.f))}};
        r.extra_csv.push_back({"witness_family",
                               {{"q_tilde", "tau0", "integral_f", "integral_bound", "grid_points", "failed", "zero_ties", "min_margin"},
                                {{q_str(qt), to_string(w.tau0), to_string(w.integral_f), to_string(w.integral_bound),
                                  std::to_string(s.units), std::to_string(s.failed), std::to_string(s.zero_ties),
                                  to_string(s.min_margin)}}}});
        r.summary << "family witness q~=" << q_str(qt) << ": " << s.units << " grid points, " << s.failed << " failures\n";
    }
}

}  // namespace

const std::vector<Command>& commands()
{
    static const std::vector<Command> cs = {
        {"residues", "square counts and window-set measures", cmd_residues},
        {"patterns", "residue pattern statistics along a modulus ladder", cmd_patterns},
        {"gaps", "gap distribution of coprime squares against the exponential law", cmd_gaps},
        {"deficiency", "translate-deficiency ladder", cmd_deficiency},
        {"rearrange", "search for a prime period making rearranged averages uniform", cmd_rearrange},
        {"family-verify", "verify every clause of a K-M family", cmd_family_verify},
        {"lift", "lift a family onto a residue class and verify it", cmd_lift},
        {"leakage", "scripted leakage recursion with exact identities", cmd_leakage},
        {"witness", "witness assembly and the divergence experiment", cmd_witness},
    };
    return cs;
}

}  // namespace sqavg::cli
