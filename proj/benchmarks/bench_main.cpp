#include "shockstab/evans.hpp"
#include "shockstab/evolution.hpp"
#include "shockstab/hypotheses.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/templates.hpp"

#include <benchmark/benchmark.h>

using namespace shockstab;

namespace {

struct Burgers {
    ModelPtr model = make_burgers();
    ShockEndstates es = classify_shock(*model, Vector::Constant(1, 1.0), Vector::Constant(1, -1.0));
    ShockProfile profile = solve_profile(*model, es);
    TemplateBundle bundle = make_template_bundle(*model, profile);
};

const Burgers& burgers() {
    static const Burgers b;
    return b;
}

void BM_ProfileSolve(benchmark::State& state) {
    const auto& b = burgers();
    for (auto _ : state) benchmark::DoNotOptimize(solve_profile(*b.model, b.es));
}
BENCHMARK(BM_ProfileSolve)->Unit(benchmark::kMillisecond);

void BM_EvansContour(benchmark::State& state) {
    const auto& b = burgers();
    EvansOptionsD o;
    o.R = 5.0;
    for (auto _ : state) benchmark::DoNotOptimize(verify_criterion_D(*b.model, b.profile, o));
}
BENCHMARK(BM_EvansContour)->Unit(benchmark::kMillisecond);

void BM_KernelEvaluation(benchmark::State& state) {
    const auto& b = burgers();
    double y = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e_profile(b.bundle, y, 2.5, EDerivative::YT));
        y = y > 3.0 ? -3.0 : y + 0.01;
    }
}
BENCHMARK(BM_KernelEvaluation);

void BM_StepperStep(benchmark::State& state) {
    const auto& b = burgers();
    const SimGrid g = make_grid(static_cast<double>(state.range(0)), 0.1);
    DiscreteFamily fam(b.profile, g);
    Stepper st(*b.model, g, b.es.u_minus, b.es.u_plus);
    Matrix u = fam.values(0.0) + perturbation(g, 1, "sech", 0.01, Vector::Ones(1));
    double t = 0.0;
    for (auto _ : state) {
        st.step(u, t);
        t += st.dt();
    }
    state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_StepperStep)->Arg(20)->Arg(120);

void BM_IterationMap(benchmark::State& state) {
    const auto& b = burgers();
    IterationOptions o;
    o.t_max = 10.0;
    IterationProblem prob(*b.model, b.profile, b.bundle, o);
    const auto zero = zero_history(prob.times());
    for (auto _ : state) benchmark::DoNotOptimize(prob.apply(zero));
}
BENCHMARK(BM_IterationMap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
