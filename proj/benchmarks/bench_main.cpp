#include "soilest/kriging.hpp"
#include "soilest/matrix_exponential.hpp"
#include "soilest/observability.hpp"
#include "soilest/richards.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace soilest;

namespace {

CylindricalGrid grid_for(benchmark::State& state) {
    return {static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), static_cast<int>(state.range(2)), 50.0,
            0.75};
}

Eigen::VectorXd heads(Index n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, -0.5);
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) x(i) = u(rng);
    return x;
}

Forcing daily() {
    Forcing f;
    f.irrigation = IrrigationSchedule::daily(3.6e-3 / 86400.0, 0.0, 8 * 3600.0, 6);
    return f;
}

void BM_Rhs(benchmark::State& state) {
    const CylindricalGrid grid = grid_for(state);
    const RichardsModel model(grid, uniform_field(grid, loam()), {}, daily());
    const Eigen::VectorXd x = heads(grid.size());
    for (auto _ : state) benchmark::DoNotOptimize(model.rhs(0.0, x));
    state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_Rhs)->Args({4, 8, 10})->Args({6, 40, 22});

void BM_Jacobian(benchmark::State& state) {
    const CylindricalGrid grid = grid_for(state);
    const RichardsModel model(grid, uniform_field(grid, loam()), {}, daily());
    const Eigen::VectorXd x = heads(grid.size());
    for (auto _ : state) benchmark::DoNotOptimize(model.jacobian(0.0, x));
    state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_Jacobian)->Args({4, 8, 10})->Args({6, 40, 22});

void BM_Step720(benchmark::State& state) {
    const CylindricalGrid grid = grid_for(state);
    const RichardsModel model(grid, uniform_field(grid, loam()), {}, daily());
    const Eigen::VectorXd x = heads(grid.size());
    for (auto _ : state) benchmark::DoNotOptimize(step(model, x, 0.0, 720.0));
}
BENCHMARK(BM_Step720)->Args({4, 8, 10})->Args({6, 40, 22})->Unit(benchmark::kMillisecond);

void BM_DiscretizeAndModalDegree(benchmark::State& state) {
    const CylindricalGrid grid = grid_for(state);
    const RichardsModel model(grid, uniform_field(grid, loam()), {}, daily());
    const Eigen::MatrixXd a = Eigen::MatrixXd(model.jacobian(0.0, heads(grid.size())));
    for (auto _ : state) benchmark::DoNotOptimize(modal_degree(discretize_jacobian(a, 720.0)));
}
BENCHMARK(BM_DiscretizeAndModalDegree)->Args({4, 8, 10})->Args({4, 16, 10})->Unit(benchmark::kMillisecond);

void BM_ExpmMultiply(benchmark::State& state) {
    const CylindricalGrid grid = grid_for(state);
    const RichardsModel model(grid, uniform_field(grid, loam()), {}, daily());
    const Eigen::SparseMatrix<double> a = model.jacobian(0.0, heads(grid.size()));
    const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(grid.size(), grid.size());
    for (auto _ : state) benchmark::DoNotOptimize(expm_multiply(a, b, 720.0));
}
BENCHMARK(BM_ExpmMultiply)->Args({4, 8, 10})->Unit(benchmark::kMillisecond);

void BM_KrigeField(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> xy(-50.0, 50.0);
    std::uniform_real_distribution<double> d(0.0, 0.75);
    std::vector<SoilSample> samples;
    for (int i = 0; i < 60; ++i) samples.push_back({{xy(rng), xy(rng), d(rng)}, loam()});
    ParameterModels models;
    models.fill({VariogramKind::exponential, 0.0, 1.0, 30.0});
    const CylindricalGrid grid = grid_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(krige_field(samples, grid, models));
}
BENCHMARK(BM_KrigeField)->Args({4, 8, 10})->Args({6, 40, 22})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
