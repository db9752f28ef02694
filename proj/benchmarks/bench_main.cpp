#include "sqavg/family.hpp"
#include "sqavg/modulus.hpp"
#include "sqavg/residue_stats.hpp"
#include "sqavg/step_function.hpp"
#include "sqavg/witness.hpp"

#include <benchmark/benchmark.h>

using namespace sqavg;

static void BM_Sigma(benchmark::State& state)
{
    const auto q = SquareFreeModulus::from_value(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(square_table(q, false));
}
BENCHMARK(BM_Sigma)->Arg(255255)->Arg(4849845);

static void BM_GapStats(benchmark::State& state)
{
    const auto q = SquareFreeModulus::from_value(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ks_exponential(gap_stats(q)));
}
BENCHMARK(BM_GapStats)->Arg(255255);

static void BM_TranslateDeficiency(benchmark::State& state)
{
    const auto q = SquareFreeModulus::from_value(static_cast<std::uint64_t>(state.range(0)));
    const auto g = GammaParam::from_c(2);
    for (auto _ : state) benchmark::DoNotOptimize(translate_deficiency(q, g, Rat(1, 5)).bad_count);
}
BENCHMARK(BM_TranslateDeficiency)->Arg(143)->Arg(10403);

static void BM_Rearrangement(benchmark::State& state)
{
    const auto F = PeriodicIntSet::unit_range(3, 0, 1);
    const std::vector<std::int64_t> ns{0, 17, 1000};
    for (auto _ : state) benchmark::DoNotOptimize(rearrangement_check(F, state.range(0), Rat(1, 4), ns).failed);
}
BENCHMARK(BM_Rearrangement)->Arg(1009)->Arg(19997);

static void BM_VerifyBaseFamily(benchmark::State& state)
{
    FamilyParams p;
    const auto fam = make_base_family(p, 1, static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(verify_family(fam, p).pass());
}
BENCHMARK(BM_VerifyBaseFamily)->Arg(1)->Arg(2);

static void BM_SupAverage(benchmark::State& state)
{
    const auto f = StepFunction::indicator(PeriodicIntSet::unit_range(state.range(0), 0, 1));
    for (auto _ : state)
        for (std::int64_t x = 0; x < state.range(0); ++x) benchmark::DoNotOptimize(sup_average_all(f, x).value);
}
BENCHMARK(BM_SupAverage)->Arg(101)->Arg(1009);

BENCHMARK_MAIN();
