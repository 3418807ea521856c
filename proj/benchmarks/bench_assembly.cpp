#include "cutflow/forms.hpp"
#include "cutflow/timeslab.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace cutflow;

namespace {

struct BenchSetup {
  std::unique_ptr<BackgroundMesh> mesh;
  std::unique_ptr<TaylorHoodSpace> space;
  std::shared_ptr<const LevelSet> levelset;
  std::unique_ptr<SpatialOperator> op;
  Vector state;

  explicit BenchSetup(int n) {
    mesh = std::make_unique<BackgroundMesh>(Rect{0, 3, 0, 1}, 3 * n, n);
    space = std::make_unique<TaylorHoodSpace>(build_taylor_hood(*mesh, 2));
    levelset = std::make_shared<CircleLevelSet>(
        RigidMotion::harmonic_x({1.545, 0.6}, 0.8, 0.5, 0.2));
    op = std::make_unique<SpatialOperator>(*mesh, *space, levelset,
                                           FluidParameters{0.001, {}},
                                           NitscheConfig{}, GhostPenaltyConfig{},
                                           BoundaryData{});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    state.resize(space->n_total);
    for (int i = 0; i < state.size(); ++i) state[i] = c(rng);
  }
};

void BM_Classification(benchmark::State& state) {
  BenchSetup s(static_cast<int>(state.range(0)));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_cells(*s.mesh, *s.levelset, t));
    t += 0.01;
  }
}
BENCHMARK(BM_Classification)->Arg(16)->Arg(32);

void BM_PrepareContext(benchmark::State& state) {
  BenchSetup s(static_cast<int>(state.range(0)));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.op->prepare(t));
    t += 0.01;  // moving geometry: tables rebuilt each time
  }
}
BENCHMARK(BM_PrepareContext)->Arg(16)->Arg(32);

void BM_Residual(benchmark::State& state) {
  BenchSetup s(static_cast<int>(state.range(0)));
  const auto ctx = s.op->prepare(0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(s.op->residual(ctx, s.state));
}
BENCHMARK(BM_Residual)->Arg(16)->Arg(32);

void BM_Jacobian(benchmark::State& state) {
  BenchSetup s(static_cast<int>(state.range(0)));
  const auto ctx = s.op->prepare(0.0);
  SparseMat j;
  for (auto _ : state) {
    s.op->assemble_jacobian(ctx, s.state, j);
    benchmark::DoNotOptimize(j);
  }
}
BENCHMARK(BM_Jacobian)->Arg(16)->Arg(32);

void BM_SlabJacobian(benchmark::State& state) {
  BenchSetup s(static_cast<int>(state.range(0)));
  const TemporalBasis basis(1);
  const Vector u_old = Vector::Zero(s.space->n_total);
  SlabSystem system(*s.op, basis, 0.0, 0.01, u_old);
  const Vector x = system.initial_guess();
  for (auto _ : state) benchmark::DoNotOptimize(system.jacobian(x));
}
BENCHMARK(BM_SlabJacobian)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
