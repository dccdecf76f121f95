#include <benchmark/benchmark.h>

#include "povmap/decide.hpp"
#include "povmap/fgt.hpp"
#include "povmap/sampler.hpp"
#include "povmap/synth.hpp"

namespace {

using namespace povmap;

const ModelData& bench_data() {
    static const ModelData data = [] {
        SyntheticConfig cfg;
        const auto pop = generate_population(cfg);
        auto sample = draw_sample(pop, {4, 8}, cfg.seed);
        return make_model_data(std::move(sample), pop.covariates);
    }();
    return data;
}

void BM_e_g0(benchmark::State& state) {
    double theta = 4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e_g0(theta, 0.8, 4.39));
        theta += 1e-9;
    }
}
BENCHMARK(BM_e_g0);

void BM_e_g1(benchmark::State& state) {
    double theta = 4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e_g1(theta, 0.8, 80.0));
        theta += 1e-9;
    }
}
BENCHMARK(BM_e_g1);

void BM_e_g_alpha(benchmark::State& state) {
    const auto nodes = static_cast<std::size_t>(state.range(0));
    double theta = 4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e_g_alpha(theta, 0.8, 80.0, 2.0, nodes));
        theta += 1e-9;
    }
}
BENCHMARK(BM_e_g_alpha)->Arg(64)->Arg(128)->Arg(256);

void BM_sweep(benchmark::State& state) {
    const auto& data = bench_data();
    const PriorConfig priors;
    McmcConfig mcmc;
    auto model = init_state(data, priors);
    Rng rng(1);
    for (auto _ : state) sweep(model, data, priors, mcmc, rng);
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_sweep);

void BM_q_tilde(benchmark::State& state) {
    const auto& data = bench_data();
    const auto model = init_state(data, PriorConfig{});
    const PovertyLines lines{80.0, 60.0};
    const double alpha = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(q_tilde(model, data.households, lines, alpha));
}
BENCHMARK(BM_q_tilde)->Arg(0)->Arg(1)->Arg(2);

void BM_extreme_probabilities(benchmark::State& state) {
    QMatrix q;
    q.values = Eigen::MatrixXd::Random(30, state.range(0));
    q.comuna_ids.resize(30, "c");
    for (auto _ : state) benchmark::DoNotOptimize(extreme_probabilities(q));
}
BENCHMARK(BM_extreme_probabilities)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
